#pragma once

#include <cstdint>

namespace flipforge::detail {

bool center_fits(std::int64_t c, std::uint32_t crop_size, std::uint32_t extent);

} // namespace flipforge::detail
