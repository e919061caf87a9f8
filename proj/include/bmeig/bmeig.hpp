#pragma once

#include "bmeig/cg.hpp"
#include "bmeig/coord.hpp"
#include "bmeig/extract.hpp"
#include "bmeig/geometry.hpp"
#include "bmeig/jacobi.hpp"
#include "bmeig/laplacian.hpp"
#include "bmeig/linesearch.hpp"
#include "bmeig/linop.hpp"
#include "bmeig/random.hpp"
#include "bmeig/shift.hpp"
#include "bmeig/spectral.hpp"
#include "bmeig/spectrum.hpp"
#include "bmeig/types.hpp"

namespace bmeig {
inline constexpr const char* kVersion = "0.1.0";
}
