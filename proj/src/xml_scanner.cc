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

#include "xml_scanner.h"

#include <cctype>
#include <cstdint>
#include <string>

#include "lexsub/text.h"

namespace lexsub::internal {
namespace {

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == ':' || c == '.';
}

}  // namespace

std::string DecodeEntities(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    const auto semi = raw.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = raw.substr(i + 1, semi - i - 1);
    std::string rep;
    if (ent == "amp") {
      rep = "&";
    } else if (ent == "lt") {
      rep = "<";
    } else if (ent == "gt") {
      rep = ">";
    } else if (ent == "quot") {
      rep = "\"";
    } else if (ent == "apos") {
      rep = "'";
    } else if (ent.size() > 1 && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = true;
      const bool hex = ent[1] == 'x' || ent[1] == 'X';
      for (std::size_t k = hex ? 2 : 1; k < ent.size(); ++k) {
        const char c = ent[k];
        if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
          cp = cp * 16 + (std::isdigit(static_cast<unsigned char>(c))
                              ? c - '0'
                              : (std::tolower(c) - 'a' + 10));
        } else if (!hex && std::isdigit(static_cast<unsigned char>(c))) {
          cp = cp * 10 + (c - '0');
        } else {
          ok = false;
          break;
        }
      }
      if (ok && cp > 0 && cp < 0x110000) {
        rep = EncodeUtf8(std::u32string(1, static_cast<char32_t>(cp)));
      }
    }
    if (rep.empty()) {
      out.push_back('&');
      continue;
    }
    out.append(rep);
    i = semi;
  }
  return out;
}

void XmlScanner::Advance(std::size_t n) {
  for (std::size_t k = 0; k < n && pos_ < doc_.size(); ++k, ++pos_) {
    if (doc_[pos_] == '\n') ++line_;
  }
}

std::optional<XmlScanner::Token> XmlScanner::Next() {
  while (pos_ < doc_.size()) {
    Token tok;
    tok.line = line_;
    const bool tag_start =
        doc_[pos_] == '<' && pos_ + 1 < doc_.size() &&
        (std::isalpha(static_cast<unsigned char>(doc_[pos_ + 1])) ||
         doc_[pos_ + 1] == '/' || doc_[pos_ + 1] == '!' ||
         doc_[pos_ + 1] == '?');
    if (!tag_start) {
      // Text runs to the next real tag.
      std::size_t end = pos_ + 1;
      for (;;) {
        end = doc_.find('<', end);
        if (end == std::string_view::npos || end + 1 >= doc_.size()) {
          end = doc_.size();
          break;
        }
        const char c = doc_[end + 1];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '/' ||
            c == '!' || c == '?') {
          break;
        }
        ++end;
      }
      tok.kind = Kind::kText;
      tok.text = DecodeEntities(doc_.substr(pos_, end - pos_));
      Advance(end - pos_);
      return tok;
    }
    if (doc_.substr(pos_).starts_with("<!--")) {
      const auto end = doc_.find("-->", pos_);
      Advance(end == std::string_view::npos ? doc_.size() : end + 3 - pos_);
      continue;
    }
    if (doc_[pos_ + 1] == '!' || doc_[pos_ + 1] == '?') {
      const auto end = doc_.find('>', pos_);
      Advance(end == std::string_view::npos ? doc_.size() : end + 1 - pos_);
      continue;
    }
    const auto close = doc_.find('>', pos_);
    const std::size_t end = close == std::string_view::npos ? doc_.size() : close;
    std::string_view body = doc_.substr(pos_ + 1, end - pos_ - 1);
    Advance(end + 1 - pos_);
    if (body.starts_with("/")) {
      tok.kind = Kind::kEnd;
      tok.name = std::string(Trim(body.substr(1)));
      return tok;
    }
    tok.kind = Kind::kStart;
    if (body.ends_with("/")) {
      tok.self_closing = true;
      body.remove_suffix(1);
    }
    std::size_t i = 0;
    while (i < body.size() && IsNameChar(body[i])) ++i;
    tok.name = std::string(body.substr(0, i));
    // attributes: name = "value" | 'value' | bare
    while (i < body.size()) {
      while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
        ++i;
      const std::size_t ns = i;
      while (i < body.size() && IsNameChar(body[i])) ++i;
      if (i == ns) {
        ++i;
        continue;
      }
      const std::string name(body.substr(ns, i - ns));
      while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
        ++i;
      std::string value;
      if (i < body.size() && body[i] == '=') {
        ++i;
        while (i < body.size() &&
               std::isspace(static_cast<unsigned char>(body[i])))
          ++i;
        if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
          const char q = body[i++];
          const auto qe = body.find(q, i);
          const std::size_t ve = qe == std::string_view::npos ? body.size() : qe;
          value = DecodeEntities(body.substr(i, ve - i));
          i = ve + 1;
        } else {
          const std::size_t vs = i;
          while (i < body.size() &&
                 !std::isspace(static_cast<unsigned char>(body[i])))
            ++i;
          value = DecodeEntities(body.substr(vs, i - vs));
        }
      }
      tok.attrs[name] = std::move(value);
    }
    return tok;
  }
  return std::nullopt;
}

}  // namespace lexsub::internal
