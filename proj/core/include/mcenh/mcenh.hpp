// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "mcenh/beamform.hpp"
#include "mcenh/error.hpp"
#include "mcenh/features.hpp"
#include "mcenh/mask_net.hpp"
#include "mcenh/metrics.hpp"
#include "mcenh/pipeline.hpp"
#include "mcenh/scene_io.hpp"
#include "mcenh/signal.hpp"
#include "mcenh/simulate.hpp"
#include "mcenh/tf_mask.hpp"
#include "mcenh/wav.hpp"
#include "mcenh/weights.hpp"
