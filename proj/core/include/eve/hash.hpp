// Copyright 2026 The EVE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace eve {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t state = 0xcbf29ce484222325ULL);

/// Lower-case 16-digit hex rendering.
std::string to_hex(std::uint64_t value);

/// FNV-1a of a whole file, rendered as hex. Throws IoError.
std::string hash_file(const std::filesystem::path& path);

}  // namespace eve
