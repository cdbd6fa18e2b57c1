#pragma once

// Everything except the command line (ivxlab/cli.hpp).

#include "ivxlab/core.hpp"
#include "ivxlab/linalg.hpp"
#include "ivxlab/random.hpp"
#include "ivxlab/parallel.hpp"
#include "ivxlab/dgp.hpp"
#include "ivxlab/longrun.hpp"
#include "ivxlab/estimators.hpp"
#include "ivxlab/breaktests.hpp"
#include "ivxlab/asymptotics.hpp"
#include "ivxlab/bootstrap.hpp"
#include "ivxlab/mc.hpp"
#include "ivxlab/io.hpp"
