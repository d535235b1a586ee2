#pragma once

// Everything except the HTTP backend, which needs sextant_http.

#include "sextant/corpus.hpp"
#include "sextant/dialogue.hpp"
#include "sextant/flips.hpp"
#include "sextant/matching.hpp"
#include "sextant/metrics.hpp"
#include "sextant/pipeline/backend.hpp"
#include "sextant/pipeline/cos.hpp"
#include "sextant/pipeline/paraphrase.hpp"
#include "sextant/pipeline/replay.hpp"
#include "sextant/pipeline/templates.hpp"
#include "sextant/pipeline/trace_io.hpp"
#include "sextant/pipeline/tuple_parser.hpp"
#include "sextant/report.hpp"
#include "sextant/report_io.hpp"
#include "sextant/synthesis.hpp"
#include "sextant/text.hpp"
#include "sextant/types.hpp"
