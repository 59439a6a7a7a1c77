#pragma once

namespace odegen {

inline const char* version_string() { return "odegen 0.1.0"; }

}  // namespace odegen
