#ifndef SVSS_SVSS_HPP
#define SVSS_SVSS_HPP

#include "svss/checkpoint.hpp"
#include "svss/data_io.hpp"
#include "svss/errors.hpp"
#include "svss/inference.hpp"
#include "svss/low_rank.hpp"
#include "svss/regression.hpp"
#include "svss/rng.hpp"
#include "svss/sm_kernel.hpp"
#include "svss/spectral_sampling.hpp"
#include "svss/types.hpp"

#endif  // SVSS_SVSS_HPP
