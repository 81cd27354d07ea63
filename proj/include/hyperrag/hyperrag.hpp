#pragma once

// Umbrella header. clients.hpp (and with it cpp-httplib) is only pulled in
// through config.hpp.

#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/eval.hpp"
#include "hyperrag/fusion.hpp"
#include "hyperrag/geometry.hpp"
#include "hyperrag/graph.hpp"
#include "hyperrag/index_store.hpp"
#include "hyperrag/metrics.hpp"
#include "hyperrag/pipeline.hpp"
#include "hyperrag/projection.hpp"
#include "hyperrag/ranking.hpp"
#include "hyperrag/retrieval.hpp"
