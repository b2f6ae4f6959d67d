#pragma once

#include "wkam/config.hpp"
#include "wkam/errors.hpp"
#include "wkam/grid.hpp"
#include "wkam/io.hpp"
#include "wkam/kernel_build.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/minimizer.hpp"
#include "wkam/monodromy.hpp"
#include "wkam/periodic_kernels.hpp"
#include "wkam/pipeline.hpp"
#include "wkam/product_kernel.hpp"
#include "wkam/rates.hpp"
#include "wkam/tropical.hpp"
#include "wkam/weak_kam.hpp"
