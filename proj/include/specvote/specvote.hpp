#pragma once

#include "specvote/array_io.hpp"
#include "specvote/cli.hpp"
#include "specvote/eigensolve.hpp"
#include "specvote/errors.hpp"
#include "specvote/gradcheck.hpp"
#include "specvote/graph.hpp"
#include "specvote/kmeans.hpp"
#include "specvote/losses.hpp"
#include "specvote/manifest.hpp"
#include "specvote/metrics.hpp"
#include "specvote/parallel.hpp"
#include "specvote/rng.hpp"
#include "specvote/spectral.hpp"
#include "specvote/voting.hpp"
