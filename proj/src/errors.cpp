#include "voleta/errors.hpp"

namespace voleta {

void throw_invalid(const std::string& what)
{
    throw InvalidInput(what);
}

} // namespace voleta
