#include "poselift/parallel.hpp"

#include <omp.h>

namespace poselift {

int resolve_threads(int requested) {
  if (requested <= 0) return omp_get_max_threads();
  return requested;
}

}  // namespace poselift
