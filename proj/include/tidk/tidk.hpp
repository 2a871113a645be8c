#pragma once

#include "tidk/baselines.hpp"
#include "tidk/bench.hpp"
#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/error.hpp"
#include "tidk/evaluation.hpp"
#include "tidk/export.hpp"
#include "tidk/io.hpp"
#include "tidk/isolation_kernel.hpp"
#include "tidk/synthetic.hpp"
#include "tidk/tidkc.hpp"
