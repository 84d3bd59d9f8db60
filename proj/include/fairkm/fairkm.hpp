#pragma once

#include "fairkm/batching.hpp"
#include "fairkm/blp.hpp"
#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/fairlet.hpp"
#include "fairkm/flow.hpp"
#include "fairkm/framework.hpp"
#include "fairkm/io.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/mincostflow.hpp"
#include "fairkm/oracle.hpp"
#include "fairkm/random.hpp"
#include "fairkm/rational.hpp"
#include "fairkm/transport.hpp"
