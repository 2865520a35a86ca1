#include "hardi/errors.hpp"

namespace hardi {

void throw_validation(const std::string& what) { throw ValidationError(what); }

}  // namespace hardi
