#pragma once

#include "longform/alignment.hpp"
#include "longform/attention.hpp"
#include "longform/consensus.hpp"
#include "longform/ctm.hpp"
#include "longform/errors.hpp"
#include "longform/json_io.hpp"
#include "longform/rng.hpp"
#include "longform/simulate.hpp"
#include "longform/transcript.hpp"
#include "longform/windowing.hpp"
