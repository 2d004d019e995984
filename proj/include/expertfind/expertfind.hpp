#pragma once

#include "aggregation.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "index.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "profiles.hpp"
#include "random.hpp"
#include "rankers.hpp"
#include "rerank.hpp"
#include "sentiment.hpp"
#include "synth.hpp"
#include "text.hpp"
