#include "chns/log.hpp"

#include <cstdlib>
#include <iostream>

namespace chns {

int verbosity() {
  static const int level = [] {
    const char* v = std::getenv("CHNS_VERBOSITY");
    return v ? std::atoi(v) : 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (verbosity() >= 1) std::cerr << "[chns] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (verbosity() >= 2) std::cerr << "[chns:debug] " << msg << '\n';
}

}  // namespace chns
