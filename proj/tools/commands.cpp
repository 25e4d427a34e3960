#include "commands.hpp"

#include <iostream>
#include <ostream>

namespace parkcast::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    (void)args;
    (void)out;
    err << "not implemented yet\n";
    return kConfigError;
}

} // namespace parkcast::cli
