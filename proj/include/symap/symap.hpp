#pragma once

// Motion retargeting between heterogeneous kinematic agents: shared-code
// dual-autoencoder mappings, chain composition across intermediate agents,
// and a workspace-overlap transferability metric for picking chains.

#include "symap/agent_io.hpp"
#include "symap/datagen.hpp"
#include "symap/dataset_io.hpp"
#include "symap/error.hpp"
#include "symap/evaluation.hpp"
#include "symap/fixtures.hpp"
#include "symap/fleet_io.hpp"
#include "symap/kinematics.hpp"
#include "symap/mapping.hpp"
#include "symap/model_io.hpp"
#include "symap/neuralnet.hpp"
#include "symap/reports.hpp"
#include "symap/rng.hpp"
#include "symap/text_io.hpp"
#include "symap/transferability.hpp"
#include "symap/version.hpp"
