#pragma once

#include "gnb/adam.hpp"
#include "gnb/autodiff.hpp"
#include "gnb/dataset_io.hpp"
#include "gnb/error.hpp"
#include "gnb/features.hpp"
#include "gnb/gft.hpp"
#include "gnb/graph.hpp"
#include "gnb/kv.hpp"
#include "gnb/metrics.hpp"
#include "gnb/models.hpp"
#include "gnb/parallel.hpp"
#include "gnb/report.hpp"
#include "gnb/rng.hpp"
#include "gnb/splits.hpp"
#include "gnb/sweep.hpp"
#include "gnb/train.hpp"
#include "gnb/version.hpp"
