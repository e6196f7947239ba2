// Copyright 2026 The DelibSLU Authors.
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

// Hand-labeled exact-match cases. Each label was decided from the matching
// rule alone: lowercase text words, strip .,!?;:'" from them, leave ontology
// tokens as they are, collapse whitespace, then compare strings.

#ifndef DELIB_TESTS_GOLDEN_H_
#define DELIB_TESTS_GOLDEN_H_

#include <array>
#include <string_view>

namespace delib::golden {

struct EmCase {
  std::string_view hyp;
  std::string_view ref;
  bool match;
  std::string_view why;
};

inline constexpr std::string_view kMusicRef =
    "[IN:PLAY_MUSIC [SL:PLAYLIST Jacques ][SL:TYPE station ]]";

inline constexpr std::array<EmCase, 20> kEmCases{{
    {"[IN:PLAY_MUSIC [SL:PLAYLIST Jock ][SL:TYPE station ]]", kMusicRef, false,
     "slot text mistranscribed"},
    {kMusicRef, kMusicRef, true, "identical"},
    {"[IN:PLAY_MUSIC [SL:PLAYLIST jacques ] [SL:TYPE station ] ]", kMusicRef, true,
     "casing and bracket spacing"},
    {"[IN:PLAY_MUSIC [SL:PLAYLIST Jacques! ] [SL:TYPE Station. ] ]", kMusicRef, true,
     "trailing punctuation"},
    {"[IN:CREATE_ALARM [SL:DATE_TIME at seven o'clock ] ]",
     "[IN:CREATE_ALARM [SL:DATE_TIME at seven oclock ] ]", true, "apostrophe"},
    {"[IN:PLAY_MUSIC [SL:SONG \"Hello,\" ] ]", "[IN:PLAY_MUSIC [SL:SONG hello ] ]", true,
     "quotes and comma"},
    {"[IN:GET_WEATHER [SL:LOCATION boston? ] ]", "[IN:GET_WEATHER [SL:LOCATION Boston ] ]", true,
     "question mark and casing"},
    {"[IN:X]", "[IN:X ]", true, "space before the closer is optional"},
    {"  [IN:GET_WEATHER \t [SL:LOCATION  boston ]  ]", "[IN:GET_WEATHER [SL:LOCATION boston ] ]",
     true, "extra whitespace"},
    {"[IN:GET_DIRECTIONS [SL:DESTINATION [IN:GET_EVENT [SL:NAME Eagles ] [SL:CATEGORY Game ] ] ] ]",
     "[IN:GET_DIRECTIONS [SL:DESTINATION [IN:GET_EVENT [SL:NAME eagles ] [SL:CATEGORY game ] ] ] ]",
     true, "compositional parse, casing only"},
    {"[IN:PLAY_RADIO [SL:PLAYLIST Jacques ][SL:TYPE station ]]", kMusicRef, false,
     "different intent"},
    {"[IN:PLAY_MUSIC [SL:ARTIST Jacques ][SL:TYPE station ]]", kMusicRef, false,
     "different slot label"},
    {"[IN:PLAY_MUSIC [SL:PLAYLIST Jacques ]]", kMusicRef, false, "missing slot"},
    {"[IN:PLAY_MUSIC [SL:TYPE station ][SL:PLAYLIST Jacques ]]", kMusicRef, false,
     "slot order swapped"},
    {"[IN:PLAY_MUSIC [SL:PLAYLIST the Jacques ][SL:TYPE station ]]", kMusicRef, false,
     "extra word inside a slot"},
    {"[in:play_music [SL:PLAYLIST Jacques ][SL:TYPE station ]]", kMusicRef, false,
     "ontology labels are not case-folded"},
    {"[IN:GET_DIRECTIONS [SL:DESTINATION eagles game ] ]",
     "[IN:GET_DIRECTIONS [SL:DESTINATION [IN:GET_EVENT [SL:NAME eagles ] [SL:CATEGORY game ] ] ] ]",
     false, "nested intent flattened"},
    {"[IN:PLAY_MUSIC [SL:PLAYLIST Jacques ][SL:TYPE station ]", kMusicRef, false,
     "malformed: missing closer"},
    {"", "[IN:GET_WEATHER ]", false, "empty prediction"},
    {"[IN:SEND_MESSAGE [SL:CONTENT e-mail me ] ]", "[IN:SEND_MESSAGE [SL:CONTENT email me ] ]",
     false, "hyphen is not in the stripped set"},
}};

}  // namespace delib::golden

#endif  // DELIB_TESTS_GOLDEN_H_
