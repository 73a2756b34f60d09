#pragma once

#include "ledgaze/calib.hpp"
#include "ledgaze/core.hpp"
#include "ledgaze/evaluate.hpp"
#include "ledgaze/eyesim.hpp"
#include "ledgaze/io.hpp"
#include "ledgaze/kernels.hpp"
#include "ledgaze/regress.hpp"
#include "ledgaze/session.hpp"
#include "ledgaze/sigproc.hpp"
#include "ledgaze/wire.hpp"
