// Copyright 2026 The Mapforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPFORGE_DIGEST_HPP_
#define MAPFORGE_DIGEST_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace mapforge {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// SHA-256 over a file's raw bytes. Throws IoError if unreadable.
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace mapforge

#endif  // MAPFORGE_DIGEST_HPP_
