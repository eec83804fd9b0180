#pragma once

#include "suffstat/dataset.hpp"
#include "suffstat/error.hpp"
#include "suffstat/exact.hpp"
#include "suffstat/graph.hpp"
#include "suffstat/harness.hpp"
#include "suffstat/linalg.hpp"
#include "suffstat/logsumexp.hpp"
#include "suffstat/model.hpp"
#include "suffstat/oracle.hpp"
#include "suffstat/reduction.hpp"
#include "suffstat/sampling.hpp"
#include "suffstat/types.hpp"
