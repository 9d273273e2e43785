#pragma once

#include "invlab/cascade.hpp"
#include "invlab/discover.hpp"
#include "invlab/group.hpp"
#include "invlab/io.hpp"
#include "invlab/meter.hpp"
#include "invlab/presets.hpp"
#include "invlab/rng.hpp"
#include "invlab/signal.hpp"
#include "invlab/stone.hpp"
#include "invlab/version.hpp"
