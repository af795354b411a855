// Umbrella header.
#pragma once

#include "cyberseer/common.hpp"
#include "cyberseer/csv.hpp"
#include "cyberseer/experiments.hpp"
#include "cyberseer/features.hpp"
#include "cyberseer/models.hpp"
#include "cyberseer/nnet.hpp"
#include "cyberseer/sigproc.hpp"
#include "cyberseer/stats.hpp"
#include "cyberseer/telemetry.hpp"
#include "cyberseer/tensor.hpp"
