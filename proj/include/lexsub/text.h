//
// Copyright 2026 The lexsub Authors.
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
//

#ifndef LEXSUB_TEXT_H_
#define LEXSUB_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lexsub {

// UTF-8 helpers. Offsets exposed by the library count code points, not
// bytes; these convert between the two. Invalid sequences decode as
// U+FFFD one byte at a time.
std::vector<char32_t> DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view code_points);
std::size_t CodePointCount(std::string_view text);

// Byte position of the code point at `index`; index == CodePointCount(text)
// maps to text.size(). Throws kInvalidArgument past the end.
std::size_t ByteOffset(std::string_view text, std::size_t index);

// Substring by code point range [begin, end).
std::string CodePointSubstr(std::string_view text, std::size_t begin,
                            std::size_t end);

// Lowercases ASCII and the Latin-1 / Latin Extended-A uppercase letters.
// That covers every gold file in the supported benchmarks.
std::string CaseFold(std::string_view text);
char32_t FoldCodePoint(char32_t c);
char32_t UpperCodePoint(char32_t c);

bool IsLetter(char32_t c);
bool IsSpace(char32_t c);
bool ContainsWhitespace(std::string_view text);
bool IsUpperLetter(char32_t c);

std::string_view Trim(std::string_view text);

// Uppercases the first code point.
std::string CapitalizeFirst(std::string_view text);
bool StartsWithUpper(std::string_view text);

std::vector<std::string_view> SplitWhitespace(std::string_view text);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace lexsub

#endif  // LEXSUB_TEXT_H_
