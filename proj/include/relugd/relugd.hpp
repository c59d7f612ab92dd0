#pragma once

#include "relugd/errors.hpp"
#include "relugd/linalg.hpp"
#include "relugd/rng.hpp"
#include "relugd/network.hpp"
#include "relugd/gram.hpp"
#include "relugd/training.hpp"
#include "relugd/certificates.hpp"
#include "relugd/probes.hpp"
#include "relugd/serialization.hpp"
#include "relugd/experiment.hpp"
