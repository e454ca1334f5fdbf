#ifndef RANGESHIFT_VERSION_HPP
#define RANGESHIFT_VERSION_HPP

namespace rangeshift {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace rangeshift

#endif
