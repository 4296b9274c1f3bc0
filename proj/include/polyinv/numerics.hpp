#pragma once

// Numerical kernel: dense linear algebra, simplex LP, special functions,
// seeded sampling and the cone-constrained minimum-norm solver.

#include "polyinv/cone_min_norm.hpp"
#include "polyinv/errors.hpp"
#include "polyinv/linalg.hpp"
#include "polyinv/lp.hpp"
#include "polyinv/random.hpp"
#include "polyinv/special.hpp"
