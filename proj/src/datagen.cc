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

#include "delib/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "delib/error.h"

namespace delib {
namespace {

struct Placeholder {
  std::string slot;
  std::string nested_intent;  // empty for a lexicon filler
};

bool is_placeholder(std::string_view tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

Placeholder parse_placeholder(std::string_view tok) {
  std::string_view body = tok.substr(1, tok.size() - 2);
  const size_t arrow = body.find('>');
  if (arrow == std::string_view::npos) return {std::string(body), {}};
  return {std::string(body.substr(0, arrow)), std::string(body.substr(arrow + 1))};
}

std::vector<std::string> flat_templates(const IntentSpec& intent) {
  std::vector<std::string> out;
  for (const std::string& t : intent.templates) {
    if (!is_compositional_template(t)) out.push_back(t);
  }
  return out;
}

std::vector<double> keyed_normals(std::string_view word, std::string_view role, size_t n) {
  Rng rng(mix_seed(fnv1a(word), role));
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

// Sound-alike substitutions a recognizer would plausibly make.
const std::vector<std::pair<std::string, std::string>>& sound_alikes() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"jacques", "jock"},  {"to", "two"},         {"for", "four"},     {"eight", "ate"},
      {"new", "knew"},      {"rain", "reign"},     {"hey", "hay"},      {"tea", "tee"},
      {"queen", "clean"},   {"sarah", "sara"},     {"maria", "mario"},  {"alex", "alec"},
      {"eagles", "eagle"},  {"giants", "giant"},   {"halo", "hello"},   {"clocks", "clock"},
      {"snow", "no"},       {"hail", "hale"},      {"boston", "austin"}, {"paris", "harris"},
      {"lakers", "lake"},   {"jazz", "jess"},      {"rock", "rack"},    {"soul", "sole"},
      {"blues", "blue"},    {"mall", "maul"},      {"work", "walk"},    {"pasta", "pastor"},
  };
  return pairs;
}

}  // namespace

bool is_compositional_template(std::string_view tmpl) {
  return tmpl.find('>') != std::string_view::npos;
}

Grammar Grammar::builtin() {
  Grammar g;
  g.domains = {
      {"music",
       {{"PLAY_MUSIC",
         {"play {ARTIST}", "play some {GENRE}", "play {PLAYLIST} {MUSIC_TYPE}",
          "put on {SONG} by {ARTIST}", "play {GENRE} music by {ARTIST}", "i want to hear {SONG}",
          "play the {PLAYLIST} {MUSIC_TYPE} please"}},
        {"PAUSE_MUSIC", {"pause the music", "stop playing music", "pause this song"}}}},
      {"navigation",
       {{"GET_DIRECTIONS",
         {"directions to {DESTINATION}", "navigate to {DESTINATION} avoiding {ROAD}",
          "how do i get to {DESTINATION} by {METHOD_TRAVEL}",
          "take me to {DESTINATION>GET_EVENT}", "directions to {DESTINATION>GET_EVENT}"}},
        {"GET_ESTIMATED_DURATION",
         {"how long to drive to {DESTINATION}",
          "how long will it take to get from {SOURCE} to {DESTINATION}",
          "how long to get to {DESTINATION>GET_EVENT}"}},
        {"GET_TRAFFIC", {"is there traffic on {ROAD}", "how is traffic near {LOCATION}"}}}},
      {"event",
       {{"GET_EVENT",
         {"the {NAME} {CATEGORY}", "the {CATEGORY} in {LOCATION}",
          "the {CATEGORY} {DATE_TIME}", "find a {CATEGORY} near {LOCATION}"}}}},
      {"alarm",
       {{"CREATE_ALARM",
         {"set an alarm for {DATE_TIME}", "wake me up at {DATE_TIME} {RECURRENCE}",
          "create a {ALARM_NAME} alarm for {DATE_TIME}"}},
        {"DELETE_ALARM", {"cancel my {DATE_TIME} alarm", "delete the {ALARM_NAME} alarm"}},
        {"SILENCE_ALARM", {"turn off the alarm", "stop the alarm"}}}},
      {"weather",
       {{"GET_WEATHER",
         {"what is the weather in {LOCATION}", "will it {WEATHER_ATTRIBUTE} {DATE_TIME}",
          "weather for {LOCATION} {DATE_TIME} in {TEMPERATURE_UNIT}",
          "what is the weather like at {LOCATION>GET_EVENT}"}}}},
      {"messaging",
       {{"SEND_MESSAGE",
         {"text {RECIPIENT} {CONTENT}", "send a message to {RECIPIENT} saying {CONTENT}",
          "message {RECIPIENT>GET_CONTACT} that {CONTENT}"}},
        {"GET_MESSAGE",
         {"read my messages from {SENDER}", "any new messages from {SENDER} {DATE_TIME}"}}}},
      {"people",
       {{"GET_CONTACT", {"my {CONTACT_RELATED}", "the {CONTACT_RELATED} of {CONTACT}"}}}},
      {"reminder",
       {{"CREATE_REMINDER",
         {"remind me to {TODO} {DATE_TIME}", "remind {PERSON_REMINDED} to {TODO}",
          "remind me to {TODO} before {DATE_TIME>GET_EVENT}"}},
        {"GET_REMINDER", {"what are my reminders {DATE_TIME}", "show reminders about {TODO}"}},
        {"DELETE_REMINDER", {"delete my reminder to {TODO}"}}}},
      {"timer",
       {{"CREATE_TIMER",
         {"set a timer for {DURATION}", "start a {DURATION} timer called {TIMER_NAME}"}},
        {"PAUSE_TIMER", {"pause the {TIMER_NAME} timer", "pause my timer"}}}},
  };
  g.lexicons = {
      {"ARTIST",
       {"jacques", "taylor swift", "the beatles", "adele", "drake", "miles davis", "norah jones",
        "queen", "coldplay", "bob marley", "ella fitzgerald", "daft punk", "nina simone",
        "radiohead", "kendrick lamar", "johnny cash"}},
      {"GENRE",
       {"jazz", "rock", "country", "classical", "hip hop", "blues", "reggae", "indie folk", "pop",
        "metal", "soul", "techno"}},
      {"PLAYLIST",
       {"jacques", "morning run", "chill vibes", "road trip", "focus", "dinner party", "workout",
        "rainy day", "throwback", "sleep"}},
      {"MUSIC_TYPE", {"station", "playlist", "album", "radio"}},
      {"SONG",
       {"yellow submarine", "hey jude", "bohemian rhapsody", "fly me to the moon",
        "hotel california", "let it be", "smooth operator", "clocks", "halo", "imagine"}},
      {"DESTINATION",
       {"the airport", "downtown", "home", "work", "central park", "the mall", "union station",
        "the library", "the hospital", "main street", "lake tahoe", "san jose", "boston"}},
      {"ROAD",
       {"highway one", "the interstate", "route sixty six", "tolls", "the bridge", "the freeway",
        "market street"}},
      {"METHOD_TRAVEL", {"car", "bus", "bike", "train", "walking", "the subway"}},
      {"SOURCE", {"home", "work", "the office", "the gym", "my hotel", "the airport"}},
      {"LOCATION",
       {"boston", "chicago", "seattle", "denver", "new york", "san francisco", "paris", "london",
        "austin", "miami", "the city", "the park"}},
      {"NAME",
       {"eagles", "lakers", "yankees", "red sox", "warriors", "giants", "taylor swift",
        "hamilton", "coldplay"}},
      {"CATEGORY",
       {"game", "concert", "show", "festival", "match", "play", "parade", "comedy show",
        "food festival", "art fair"}},
      {"DATE_TIME",
       {"tomorrow", "tonight", "today", "this weekend", "seven am", "six thirty", "noon",
        "monday morning", "next friday", "in an hour", "eight pm", "tomorrow morning", "sunday",
        "this evening"}},
      {"RECURRENCE", {"every day", "on weekdays", "every monday", "daily", "every weekend"}},
      {"ALARM_NAME", {"gym", "work", "medicine", "school", "meeting", "pickup"}},
      {"WEATHER_ATTRIBUTE", {"rain", "snow", "be sunny", "be windy", "storm", "hail"}},
      {"TEMPERATURE_UNIT", {"celsius", "fahrenheit"}},
      {"RECIPIENT",
       {"mom", "dad", "jacques", "sarah", "john smith", "the team", "alex", "maria lopez",
        "grandma", "kevin", "priya"}},
      {"CONTENT",
       {"i am running late", "see you soon", "call me back", "dinner is ready", "on my way",
        "happy birthday", "where are you", "thanks for lunch", "the meeting moved",
        "bring an umbrella"}},
      {"SENDER",
       {"mom", "dad", "sarah", "john smith", "my boss", "alex", "maria lopez", "kevin"}},
      {"CONTACT", {"sarah", "alex", "john smith", "kevin", "priya", "maria lopez"}},
      {"CONTACT_RELATED",
       {"sister", "brother", "wife", "husband", "boss", "best friend", "mom", "dad", "roommate",
        "coworker"}},
      {"TODO",
       {"buy milk", "call the dentist", "pay rent", "water the plants", "pick up the kids",
        "take out the trash", "book flights", "feed the cat", "send the report",
        "renew my passport"}},
      {"PERSON_REMINDED", {"dad", "sarah", "alex", "my husband", "my wife", "kevin"}},
      {"DURATION",
       {"ten minutes", "five minutes", "an hour", "thirty seconds", "twenty minutes",
        "two hours", "half an hour", "ninety seconds"}},
      {"TIMER_NAME", {"pasta", "eggs", "laundry", "pizza", "workout", "nap", "tea", "oven"}},
  };
  g.validate();
  return g;
}

void Grammar::validate() const {
  size_t intents = 0;
  for (const DomainSpec& d : domains) {
    for (const IntentSpec& intent : d.intents) {
      ++intents;
      OntologySymbol::from_token("[IN:" + intent.label);
      if (intent.templates.empty()) throw Error(ErrorCode::kFormat, intent.label + " has no templates");
      for (const std::string& t : intent.templates) {
        std::istringstream words(t);
        std::string tok;
        while (words >> tok) {
          if (!is_placeholder(tok)) continue;
          const Placeholder ph = parse_placeholder(tok);
          OntologySymbol::from_token("[SL:" + ph.slot);
          if (ph.nested_intent.empty()) {
            auto lex = lexicons.find(ph.slot);
            if (lex == lexicons.end() || lex->second.empty()) {
              throw Error(ErrorCode::kFormat, "slot " + ph.slot + " has no lexicon");
            }
            continue;
          }
          const IntentSpec* nested = find_intent(ph.nested_intent);
          if (nested == nullptr) throw Error(ErrorCode::kFormat, "unknown intent " + ph.nested_intent);
          if (flat_templates(*nested).empty()) {
            throw Error(ErrorCode::kFormat, ph.nested_intent + " has no flat template to nest");
          }
        }
      }
    }
  }
  if (intents == 0) throw Error(ErrorCode::kFormat, "grammar has no intents");
}

const IntentSpec* Grammar::find_intent(std::string_view label) const {
  for (const DomainSpec& d : domains) {
    for (const IntentSpec& intent : d.intents) {
      if (intent.label == label) return &intent;
    }
  }
  return nullptr;
}

std::vector<std::string> Grammar::intent_labels() const {
  std::vector<std::string> out;
  for (const DomainSpec& d : domains) {
    for (const IntentSpec& intent : d.intents) out.push_back(intent.label);
  }
  return out;
}

std::vector<std::string> Grammar::slot_labels() const {
  std::set<std::string> slots;
  for (const DomainSpec& d : domains) {
    for (const IntentSpec& intent : d.intents) {
      for (const std::string& t : intent.templates) {
        std::istringstream words(t);
        std::string tok;
        while (words >> tok) {
          if (is_placeholder(tok)) slots.insert(parse_placeholder(tok).slot);
        }
      }
    }
  }
  return {slots.begin(), slots.end()};
}

std::vector<std::string> Grammar::words() const {
  std::set<std::string> out;
  auto add_all = [&](const std::string& text) {
    std::istringstream words(text);
    std::string w;
    while (words >> w) {
      if (!is_placeholder(w)) out.insert(w);
    }
  };
  for (const DomainSpec& d : domains) {
    for (const IntentSpec& intent : d.intents) {
      for (const std::string& t : intent.templates) add_all(t);
    }
  }
  for (const auto& [slot, fillers] : lexicons) {
    for (const std::string& f : fillers) add_all(f);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> Grammar::ontology_tokens() const {
  std::vector<std::string> out;
  for (const std::string& label : intent_labels()) out.push_back("[IN:" + label);
  for (const std::string& label : slot_labels()) out.push_back("[SL:" + label);
  out.emplace_back(kCloseToken);
  return out;
}

Utterance instantiate(const Grammar& grammar, const IntentSpec& intent, std::string_view tmpl,
                      Rng& rng) {
  Utterance u;
  u.tree.symbol = {SymbolKind::kIntent, intent.label};
  std::istringstream words{std::string(tmpl)};
  std::string tok;
  while (words >> tok) {
    if (!is_placeholder(tok)) {
      u.words.push_back(tok);
      continue;
    }
    const Placeholder ph = parse_placeholder(tok);
    ParseNode slot{{SymbolKind::kSlot, ph.slot}, {}};
    if (ph.nested_intent.empty()) {
      for (const std::string& w : split_words(rng.pick(grammar.lexicons.at(ph.slot)))) {
        u.words.push_back(w);
        slot.children.emplace_back(w);
      }
    } else {
      const IntentSpec& nested = *grammar.find_intent(ph.nested_intent);
      const std::vector<std::string> options = flat_templates(nested);
      Utterance inner = instantiate(grammar, nested, rng.pick(options), rng);
      u.words.insert(u.words.end(), inner.words.begin(), inner.words.end());
      slot.children.emplace_back(std::move(inner.tree));
    }
    u.tree.children.emplace_back(std::move(slot));
  }
  return u;
}

std::vector<UtteranceRecord> generate_corpus(const Grammar& grammar, size_t n,
                                             double compositional_fraction, uint64_t seed) {
  if (!(compositional_fraction >= 0.0 && compositional_fraction <= 1.0)) {
    throw Error(ErrorCode::kFractionOutOfRange,
                "compositional fraction " + std::to_string(compositional_fraction));
  }
  struct Choice {
    const IntentSpec* intent;
    std::vector<std::string> templates;
  };
  std::vector<Choice> flat, nested;
  for (const DomainSpec& d : grammar.domains) {
    for (const IntentSpec& intent : d.intents) {
      Choice f{&intent, {}}, c{&intent, {}};
      for (const std::string& t : intent.templates) {
        (is_compositional_template(t) ? c : f).templates.push_back(t);
      }
      if (!f.templates.empty()) flat.push_back(std::move(f));
      if (!c.templates.empty()) nested.push_back(std::move(c));
    }
  }
  Rng rng(mix_seed(seed, "corpus"));
  std::vector<UtteranceRecord> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const bool compositional = rng.bernoulli(compositional_fraction) && !nested.empty();
    const Choice& choice = rng.pick(compositional ? nested : flat);
    Utterance u = instantiate(grammar, *choice.intent, rng.pick(choice.templates), rng);
    UtteranceRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "utt-%06zu", i);
    r.id = id;
    r.reference_text = u.words;
    r.hypothesis_text = u.words;
    r.target_annotation = serialize(u.tree);
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view to_string(FeatureChannel c) {
  return c == FeatureChannel::kNatural ? "natural" : "mismatched";
}

FeatureChannel parse_channel(std::string_view s) {
  if (s == "natural") return FeatureChannel::kNatural;
  if (s == "mismatched") return FeatureChannel::kMismatched;
  throw Error(ErrorCode::kUsage, "unknown feature channel '" + std::string(s) + "'");
}

Tensor synth_audio_features(const std::vector<std::string>& words, FeatureChannel channel,
                            uint64_t seed, const AudioSynthConfig& config) {
  if (words.empty()) throw Error(ErrorCode::kEmptyReference, "no words to voice");
  const size_t f = config.feature_dim;
  const bool natural = channel == FeatureChannel::kNatural;
  const size_t base_frames = natural ? config.frames_per_word : config.mismatched_frames_per_word;
  const size_t jitter = natural ? config.jitter : config.mismatched_jitter;
  const double noise = natural ? config.noise : config.mismatched_noise;
  const std::vector<double> offset = keyed_normals("", "synthetic-offset", f);
  Rng rng(seed);
  std::vector<double> values;
  for (const std::string& w : words) {
    const std::vector<double> base = keyed_normals(w, "base", f);
    std::vector<double> centre = base;
    if (!natural) {
      const std::vector<double> voice = keyed_normals(w, "synthetic-voice", f);
      for (size_t k = 0; k < f; ++k) {
        centre[k] = config.mismatched_base_scale * base[k] +
                    config.mismatched_voice_scale * voice[k] +
                    config.mismatched_offset_scale * offset[k];
      }
    }
    const int64_t frames = std::max<int64_t>(
        1, static_cast<int64_t>(base_frames) +
               rng.between(-static_cast<int64_t>(jitter), static_cast<int64_t>(jitter)));
    for (int64_t t = 0; t < frames; ++t) {
      for (size_t k = 0; k < f; ++k) values.push_back(quantize(centre[k] + noise * rng.normal()));
    }
  }
  const size_t rows = values.size() / f;
  return Tensor(rows, f, std::move(values));
}

void attach_audio(std::vector<UtteranceRecord>& records, FeatureChannel channel, uint64_t seed,
                  const AudioSynthConfig& config) {
  for (UtteranceRecord& r : records) {
    r.audio = synth_audio_features(r.reference_text, channel,
                                   mix_seed(mix_seed(seed, "audio"), r.id), config);
  }
}

void attach_hypotheses(std::vector<UtteranceRecord>& records, const AsrErrorModel& model,
                       uint64_t seed) {
  model.validate();
  for (UtteranceRecord& r : records) {
    r.hypothesis_text = corrupt(r.reference_text, model, mix_seed(mix_seed(seed, "asr"), r.id));
    r.has_asr_error = differs_after_normalization(r.hypothesis_text, r.reference_text);
  }
}

DatasetSplits split(std::vector<UtteranceRecord> records, const SplitRatios& ratios,
                    uint64_t seed) {
  for (double r : {ratios.train, ratios.valid, ratios.test}) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::kBadRatios, "ratio " + std::to_string(r));
  }
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-6) {
    throw Error(ErrorCode::kBadRatios, "split ratios must sum to 1");
  }
  Rng rng(mix_seed(seed, "split"));
  rng.shuffle(records);
  const size_t n = records.size();
  const size_t n_train = std::min<size_t>(n, static_cast<size_t>(std::llround(n * ratios.train)));
  const size_t n_valid =
      std::min<size_t>(n - n_train, static_cast<size_t>(std::llround(n * ratios.valid)));
  DatasetSplits out;
  auto begin = std::make_move_iterator(records.begin());
  out.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  out.valid.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                   begin + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_valid),
                  std::make_move_iterator(records.end()));
  return out;
}

ConfusionPools build_confusion_pools(const Grammar& grammar, uint64_t seed) {
  ConfusionPools pools;
  Rng rng(mix_seed(seed, "confusion"));
  for (const std::string& w : grammar.words()) {
    std::vector<std::string>& alts = pools[w];
    for (int attempt = 0; alts.size() < 2 && attempt < 16; ++attempt) {
      std::string alt = perturb_word(w, rng);
      if (alt != w && std::find(alts.begin(), alts.end(), alt) == alts.end()) {
        alts.push_back(std::move(alt));
      }
    }
  }
  for (const auto& [word, alike] : sound_alikes()) {
    auto it = pools.find(word);
    if (it != pools.end()) it->second.push_back(alike);
  }
  return pools;
}

std::vector<std::string> insertion_fillers() {
  return {"uh", "um", "the", "a", "so", "like", "please", "oh"};
}

}  // namespace delib
