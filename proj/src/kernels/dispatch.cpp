#include "dpmeter/kernels.hpp"

#include "backends.hpp"
#include "dpmeter/error.hpp"

namespace dpmeter::kernels {
namespace {

Backend& current() {
  static Backend b = avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
  return b;
}

}  // namespace

bool avx2_supported() {
#ifdef DPMETER_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops& ops_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return kScalarOps;
    case Backend::kAvx2:
#ifdef DPMETER_HAVE_AVX2
      if (avx2_supported()) return kAvx2Ops;
#endif
      fail(Errc::kInvalidArgument, "avx2 backend not available on this host");
  }
  fail(Errc::kInvalidArgument, "unknown kernel backend");
}

Backend active_backend() { return current(); }

void set_backend(Backend backend) {
  ops_for(backend);  // validates availability
  current() = backend;
}

const Ops& active() { return ops_for(current()); }

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace dpmeter::kernels
