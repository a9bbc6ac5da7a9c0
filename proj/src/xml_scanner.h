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

#ifndef LEXSUB_SRC_XML_SCANNER_H_
#define LEXSUB_SRC_XML_SCANNER_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace lexsub::internal {

// Pull tokenizer for the XML-like benchmark releases. It does not validate
// nesting, tolerates bare '&' and '<' that do not start a tag, skips
// comments, declarations and processing instructions, and decodes the five
// predefined entities plus numeric character references.
class XmlScanner {
 public:
  enum class Kind { kStart, kEnd, kText };

  struct Token {
    Kind kind = Kind::kText;
    std::string name;  // tag name for kStart / kEnd
    std::map<std::string, std::string> attrs;
    bool self_closing = false;
    std::string text;  // decoded text for kText
    int line = 1;      // line where the token starts
  };

  explicit XmlScanner(std::string_view doc) : doc_(doc) {}

  std::optional<Token> Next();

 private:
  std::string_view doc_;
  std::size_t pos_ = 0;
  int line_ = 1;

  void Advance(std::size_t n);
};

std::string DecodeEntities(std::string_view raw);

}  // namespace lexsub::internal

#endif  // LEXSUB_SRC_XML_SCANNER_H_
