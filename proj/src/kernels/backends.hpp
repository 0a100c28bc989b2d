#pragma once

#include "dpmeter/kernels.hpp"

namespace dpmeter::kernels {

extern const Ops kScalarOps;
#ifdef DPMETER_HAVE_AVX2
extern const Ops kAvx2Ops;
#endif

}  // namespace dpmeter::kernels
