// Copyright 2026 The glyphsr Authors. All Rights Reserved.
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

#include "glyphsr/glyphs.hpp"

#include "glyphsr/errors.hpp"

namespace glyphsr {

namespace {

// clang-format off
constexpr std::array<GlyphBitmap, kNumGlyphs> kFont{{
  {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"},  // A
  {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "},  // B
  {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "},  // C
  {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "},  // D
  {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"},  // E
  {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "},  // F
  {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"},  // G
  {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"},  // H
  {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "},  // I
  {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "},  // J
  {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"},  // K
  {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"},  // L
  {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"},  // M
  {"#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"},  // N
  {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "},  // O
  {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "},  // P
  {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"},  // Q
  {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"},  // R
  {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "},  // S
  {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "},  // T
  {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "},  // U
  {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "},  // V
  {"#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "},  // W
  {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"},  // X
  {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "},  // Y
  {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"},  // Z
  {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "},  // 0
  {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "},  // 1
  {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"},  // 2
  {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "},  // 3
  {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "},  // 4
  {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "},  // 5
  {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "},  // 6
  {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "},  // 7
  {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "},  // 8
  {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "},  // 9
}};
// clang-format on

constexpr std::string_view kChars = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

}  // namespace

const GlyphBitmap& glyph_bitmap(int glyph) {
  require(glyph >= 0 && glyph < kNumGlyphs, "glyph_bitmap: glyph id out of range");
  return kFont[static_cast<std::size_t>(glyph)];
}

char glyph_char(int glyph) {
  require(glyph >= 0 && glyph < kNumGlyphs, "glyph_char: glyph id out of range");
  return kChars[static_cast<std::size_t>(glyph)];
}

int glyph_index(char c) {
  const auto pos = kChars.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

std::vector<int> caption_tokens(std::string_view caption) {
  std::vector<int> out;
  out.reserve(caption.size());
  for (std::size_t i = 0; i < caption.size(); ++i) {
    const int g = glyph_index(caption[i]);
    if (g < 0)
      throw ContractError("caption contains character '" + std::string(1, caption[i]) + "' at position " +
                          std::to_string(i) + " which is not in the glyph alphabet [A-Z0-9]");
    out.push_back(Vocab::kFirstGlyph + g);
  }
  return out;
}

std::vector<int> prompt_tokens(std::string_view caption, PromptTemplate tpl, int max_len) {
  std::vector<int> out;
  const auto glyphs = caption_tokens(caption);
  if (!glyphs.empty() && tpl == PromptTemplate::kVerbose) {
    out.push_back(Vocab::kTemplateSign);
    out.push_back(Vocab::kTemplateReads);
  }
  out.insert(out.end(), glyphs.begin(), glyphs.end());
  require(static_cast<int>(out.size()) <= max_len,
          "prompt of " + std::to_string(out.size()) + " tokens exceeds the maximum length " + std::to_string(max_len));
  out.resize(static_cast<std::size_t>(max_len), Vocab::kPad);
  return out;
}

std::vector<int> empty_prompt(int max_len) { return std::vector<int>(static_cast<std::size_t>(max_len), Vocab::kPad); }

}  // namespace glyphsr
