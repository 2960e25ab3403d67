#pragma once

// Convenience aggregate. Each header also stands alone.

#include "polarlens/config.hpp"
#include "polarlens/entropy.hpp"
#include "polarlens/error.hpp"
#include "polarlens/graph.hpp"
#include "polarlens/ingest.hpp"
#include "polarlens/io.hpp"
#include "polarlens/pipeline.hpp"
#include "polarlens/record.hpp"
#include "polarlens/report.hpp"
#include "polarlens/scorer_client.hpp"
#include "polarlens/scoring.hpp"
#include "polarlens/stats.hpp"
#include "polarlens/synth.hpp"
#include "polarlens/temporal.hpp"
#include "polarlens/text.hpp"
#include "polarlens/version.hpp"
