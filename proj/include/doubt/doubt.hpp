#pragma once

// Umbrella header for the doubt library.

#include "doubt/cost.hpp"
#include "doubt/extended_real.hpp"
#include "doubt/ingest_report.hpp"
#include "doubt/json_format.hpp"
#include "doubt/matrix_scores.hpp"
#include "doubt/projective.hpp"
#include "doubt/score_core.hpp"
#include "doubt/train_demo.hpp"
