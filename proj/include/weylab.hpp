#pragma once

#include "weylab/errors.hpp"
#include "weylab/quadrature.hpp"
#include "weylab/surface.hpp"
#include "weylab/mesh.hpp"
#include "weylab/lb_spectrum.hpp"
#include "weylab/spectrum_cache.hpp"
#include "weylab/symbols.hpp"
#include "weylab/symbol_suite.hpp"
#include "weylab/semiclassical.hpp"
#include "weylab/scan.hpp"
#include "weylab/regions.hpp"
#include "weylab/config.hpp"
