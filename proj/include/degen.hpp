#pragma once

#include "degen/admissibility.hpp"
#include "degen/config.hpp"
#include "degen/energy.hpp"
#include "degen/error.hpp"
#include "degen/expression.hpp"
#include "degen/grid.hpp"
#include "degen/io.hpp"
#include "degen/linalg.hpp"
#include "degen/multibump.hpp"
#include "degen/nonlinearity.hpp"
#include "degen/pipeline.hpp"
#include "degen/spectral.hpp"
#include "degen/stencil.hpp"
#include "degen/topology.hpp"
#include "degen/verify.hpp"
#include "degen/weights.hpp"
