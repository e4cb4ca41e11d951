#include <cstdlib>
#include <string_view>

#include "rsm/error.hpp"
#include "rsm/kernels.hpp"

namespace rsm::kernels {

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return avx2::compiled() && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::Scalar};
  if (supported(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw Error(ErrorKind::InvalidArgument, "kernel ISA not supported on this CPU");
  return isa == Isa::Avx2 ? avx2::table() : scalar::table();
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("RSM_KERNELS");
    const std::string_view want = env != nullptr ? env : "";
    if (want == "scalar") return scalar::table();
    if (supported(Isa::Avx2)) return avx2::table();
    return scalar::table();
  }();
  return chosen;
}

}  // namespace rsm::kernels
