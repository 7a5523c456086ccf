#pragma once

#include "qholo/dynamics.hpp"
#include "qholo/echo.hpp"
#include "qholo/errors.hpp"
#include "qholo/geometry.hpp"
#include "qholo/numerics.hpp"
#include "qholo/potential.hpp"
