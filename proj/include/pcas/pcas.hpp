#pragma once

#include "pcas/corpus.hpp"
#include "pcas/dataset_builder.hpp"
#include "pcas/embedding.hpp"
#include "pcas/error.hpp"
#include "pcas/evaluation.hpp"
#include "pcas/lexical.hpp"
#include "pcas/pipelines.hpp"
#include "pcas/random.hpp"
#include "pcas/ranked_list.hpp"
#include "pcas/scorer.hpp"
#include "pcas/text.hpp"
