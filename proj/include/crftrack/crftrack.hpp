// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

// Umbrella header.

#include "crftrack/ablate.hpp"
#include "crftrack/assignment.hpp"
#include "crftrack/config.hpp"
#include "crftrack/crf.hpp"
#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/grid.hpp"
#include "crftrack/metrics.hpp"
#include "crftrack/mot_io.hpp"
#include "crftrack/providers.hpp"
#include "crftrack/random.hpp"
#include "crftrack/simulate.hpp"
#include "crftrack/tracker.hpp"
#include "crftrack/tracklet.hpp"
