#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpath::cli {

int run(int argc, char** argv);
/// args excludes the program name.
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpath::cli
