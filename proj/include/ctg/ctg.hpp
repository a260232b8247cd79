#pragma once

// Umbrella header for the CTG analysis engine.

#include "ctg/agents.hpp"
#include "ctg/analysis.hpp"
#include "ctg/baseline.hpp"
#include "ctg/classify.hpp"
#include "ctg/csv.hpp"
#include "ctg/episodes.hpp"
#include "ctg/errors.hpp"
#include "ctg/eval.hpp"
#include "ctg/prompts.hpp"
#include "ctg/render.hpp"
#include "ctg/rng.hpp"
#include "ctg/signal.hpp"
#include "ctg/sinusoidal.hpp"
#include "ctg/synth.hpp"
