#pragma once

#include "proxsplit/core.hpp"
#include "proxsplit/random.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/methods.hpp"
#include "proxsplit/bench.hpp"
#include "proxsplit/io.hpp"
#include "proxsplit/experiment.hpp"
#include "proxsplit/diagnostics.hpp"
