#pragma once

#include "vwave/core.hpp"
#include "vwave/fit.hpp"
#include "vwave/scale.hpp"
#include "vwave/bump.hpp"
#include "vwave/fft.hpp"
#include "vwave/mollifier.hpp"
#include "vwave/distribution.hpp"
#include "vwave/coefficients.hpp"
#include "vwave/system.hpp"
#include "vwave/solver.hpp"
#include "vwave/analysis.hpp"
#include "vwave/config.hpp"
#include "vwave/svg.hpp"
#include "vwave/experiment.hpp"
