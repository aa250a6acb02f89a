#include <sstream>

#include "mirrorcoin/types.hpp"

namespace mirrorcoin {

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : std::runtime_error([&] {
        std::ostringstream os;
        for (std::size_t i = 0; i < violations.size(); ++i) {
          if (i) os << "; ";
          os << violations[i].key << ": " << violations[i].reason;
        }
        return os.str();
      }()),
      violations_(std::move(violations)) {}

ConfigError::ConfigError(std::string key, std::string reason)
    : ConfigError(std::vector<ConfigViolation>{{std::move(key), std::move(reason)}}) {}

}  // namespace mirrorcoin
