#ifndef BYRDIE_VERSION_HPP
#define BYRDIE_VERSION_HPP

namespace byrdie {

inline constexpr const char* kVersion = "0.1.0";

} // namespace byrdie

#endif
