#pragma once

#include "era/auction.hpp"
#include "era/bench.hpp"
#include "era/bigint.hpp"
#include "era/bulletin.hpp"
#include "era/config.hpp"
#include "era/errors.hpp"
#include "era/group.hpp"
#include "era/hash.hpp"
#include "era/ope.hpp"
#include "era/ot.hpp"
#include "era/paillier.hpp"
#include "era/rangeproof.hpp"
#include "era/rng.hpp"
#include "era/schnorr.hpp"
