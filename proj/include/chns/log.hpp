/// @file log.hpp
/// @brief Minimal stderr logging. Level comes from CHNS_VERBOSITY (0 quiet, 1 info, 2 debug).

#pragma once

#include <string>

namespace chns {

int verbosity();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace chns
