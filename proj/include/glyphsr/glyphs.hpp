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

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glyphsr {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kNumGlyphs = 36;  // A-Z then 0-9

using GlyphBitmap = std::array<std::string_view, kGlyphHeight>;

const GlyphBitmap& glyph_bitmap(int glyph);
char glyph_char(int glyph);
// -1 when the character is not in the alphabet.
int glyph_index(char c);

// Token vocabulary shared by generator, discriminator and the CLI.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kFirstGlyph = 1;
  static constexpr int kTemplateSign = kFirstGlyph + kNumGlyphs;  // "<sign>"
  static constexpr int kTemplateReads = kTemplateSign + 1;        // "<reads>"
  static constexpr int kSize = kTemplateReads + 1;
  static constexpr int kTemplateOverhead = 2;
};

enum class PromptTemplate { kTerse, kVerbose };

// Glyph tokens for a caption. Rejects characters outside the alphabet.
std::vector<int> caption_tokens(std::string_view caption);

// Caption wrapped in a template and right-padded with kPad to max_len.
// An empty caption yields all padding regardless of the template.
std::vector<int> prompt_tokens(std::string_view caption, PromptTemplate tpl, int max_len);

// All-pad prompt ("no prompt").
std::vector<int> empty_prompt(int max_len);

}  // namespace glyphsr
