#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "mentor/train.hpp"

#include <spdlog/spdlog.h>

int main(int argc, char** argv) {
  mentor::configure_allocator();
  spdlog::set_level(spdlog::level::warn);
  doctest::Context context(argc, argv);
  return context.run();
}
