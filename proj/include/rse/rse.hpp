#pragma once

#include "rse/bench.hpp"
#include "rse/config.hpp"
#include "rse/edit_distance.hpp"
#include "rse/embedding.hpp"
#include "rse/errors.hpp"
#include "rse/ingest.hpp"
#include "rse/kernel_diagnostics.hpp"
#include "rse/linear_classifier.hpp"
#include "rse/parallel.hpp"
#include "rse/pipeline.hpp"
#include "rse/rng.hpp"
#include "rse/sampler.hpp"
#include "rse/stats.hpp"
