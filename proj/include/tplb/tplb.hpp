#pragma once

#include "tplb/apt.hpp"
#include "tplb/confidence.hpp"
#include "tplb/confusion.hpp"
#include "tplb/core_types.hpp"
#include "tplb/error.hpp"
#include "tplb/io.hpp"
#include "tplb/numeric.hpp"
#include "tplb/percolation.hpp"
#include "tplb/rng.hpp"
#include "tplb/similarity.hpp"
#include "tplb/snp.hpp"
#include "tplb/synth.hpp"
