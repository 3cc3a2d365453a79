#include "lidar_normals/parallel.hpp"

#include <omp.h>

namespace lidar_normals {

namespace {
int g_threads = 0;
}

void set_thread_count(int n) { g_threads = n > 0 ? n : 0; }

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

}  // namespace lidar_normals
