#include "twd/error.hpp"

namespace twd {

void throw_input(const std::string& what) { throw InputError(what); }

}  // namespace twd
