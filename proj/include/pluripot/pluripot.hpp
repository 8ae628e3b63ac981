#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "poly_basis.hpp"
#include "geometry.hpp"
#include "orthonormal.hpp"
#include "extremal.hpp"
#include "transfinite.hpp"
#include "equilibrium.hpp"
#include "rho.hpp"
