#pragma once

#include "qppr/arith.hpp"
#include "qppr/datagen.hpp"
#include "qppr/error.hpp"
#include "qppr/fixed_point.hpp"
#include "qppr/graph.hpp"
#include "qppr/metrics.hpp"
#include "qppr/ppr.hpp"
#include "qppr/qcoo.hpp"
#include "qppr/rank_batch.hpp"
#include "qppr/rng.hpp"
#include "qppr/spmv.hpp"
