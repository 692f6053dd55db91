#pragma once

// Convenience header pulling in the whole library.

#include "rankmap/cost.hpp"
#include "rankmap/cssd.hpp"
#include "rankmap/dataset.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/distexec.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/exact_sum.hpp"
#include "rankmap/gram.hpp"
#include "rankmap/io.hpp"
#include "rankmap/metrics.hpp"
#include "rankmap/parallel.hpp"
#include "rankmap/qr.hpp"
#include "rankmap/rng.hpp"
#include "rankmap/solvers.hpp"
#include "rankmap/sparse_matrix.hpp"
#include "rankmap/tuner.hpp"
