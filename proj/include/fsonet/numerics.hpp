#pragma once

#include "fsonet/numerics/quadrature.hpp"
#include "fsonet/numerics/rng.hpp"
#include "fsonet/numerics/special.hpp"
#include "fsonet/numerics/stats.hpp"
