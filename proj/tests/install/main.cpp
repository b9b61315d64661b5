#include <cstdio>

#include "fedgala/config.hpp"
#include "fedgala/global_alignment.hpp"

int main() {
  const auto cfg = fedgala::parse_config("protocol.tau = 0.5\n");
  std::printf("%s\n", fedgala::canonical_config(cfg).empty() ? "empty" : "ok");
  return cfg.tau == 0.5 ? 0 : 1;
}
