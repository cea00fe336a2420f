#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "geotag/corpus.hpp"

namespace test_support {

inline std::vector<std::string> split_words(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) tokens.push_back(tok);
    return tokens;
}

inline geotag::Gazetteer gazetteer_from(const std::vector<std::string>& entries) {
    geotag::Gazetteer gaz;
    for (const auto& entry : entries) gaz.entries.push_back(split_words(entry));
    return gaz;
}

// 30 place names, 1 to 4 tokens each.
inline geotag::Gazetteer small_gazetteer() {
    return gazetteer_from({
        "tokyo", "nepal", "peru", "mexico", "baghdad", "kurdistan", "missouri",
        "manila", "reading", "phoenix",
        "new york", "los angeles", "san francisco", "new zealand", "puerto rico",
        "costa rica", "sri lanka", "hong kong", "cape town", "abu dhabi",
        "kermadec island", "nice bay",
        "salt lake city", "rio de janeiro", "port au prince", "kuala lumpur area",
        "dar es salaam",
        "santa cruz de tenerife", "san miguel de allende", "san juan del sur",
    });
}

// 10 templates spanning 0, 1, and 2 slots at varied positions.
inline std::vector<std::string> small_templates() {
    return {
        "strong earthquake felt in {LOC} this morning",
        "tremors reported near {LOC} and {LOC} tonight",
        "magnitude 5 quake hits {LOC}",
        "earthquake drill scheduled for tomorrow",
        "praying for everyone in {LOC} right now",
        "{LOC} was shaking for almost a minute",
        "aftershocks continue across {LOC} since friday",
        "no damage reported after the quake",
        "rescue teams heading to {LOC} from {LOC}",
        "evacuation under way in downtown {LOC}",
    };
}

// Deliberately confusable place names: heavy word overlap across entry
// lengths ("york" / "new york" / "new york city"), and several words that
// the templates below also use as ordinary words.
inline geotag::Gazetteer hard_gazetteer() {
    return gazetteer_from({
        "york", "jersey", "phoenix", "reading", "nice", "java", "cork", "mobile",
        "buffalo", "orange",
        "new york", "new jersey", "san jose", "san juan", "santa cruz", "long beach",
        "little rock", "grand rapids", "buffalo grove", "orange county",
        "new york city", "san juan capistrano", "santa cruz island", "long beach port",
        "salt lake city", "rio de janeiro",
        "san juan del sur", "santa cruz de tenerife", "salt lake city south",
        "rio de janeiro north",
    });
}

// Templates paired so that the words around a slot also occur around
// non-locations, plus no-slot lines that reuse gazetteer words as plain
// words. Token identity alone cannot produce the mask.
inline std::vector<std::string> hard_templates() {
    return {
        "strong earthquake felt in {LOC} this morning",
        "strong earthquake felt in several towns this morning",
        "breaking news strong earthquake felt in {LOC} today",
        "just in tremors reported near {LOC} again",
        "tremors reported near {LOC} and {LOC} tonight",
        "magnitude 5 quake hits {LOC}",
        "update magnitude 6 quake hits {LOC} hard",
        "help is arriving from {LOC} tonight",
        "help is arriving from volunteers tonight",
        "people near {LOC} felt it for a minute",
        "people near here felt it for a minute",
        "{LOC} shaken by a strong quake",
        "buildings shaken by a strong quake",
        "reports coming out of {LOC} now",
        "reports coming out of hospitals now",
        "rescue teams heading to {LOC} from {LOC}",
        "the {LOC} area lost power after the quake",
        "the whole area lost power after the quake",
        "evacuation under way in downtown {LOC}",
        "officials in {LOC} confirm minor damage",
        "officials in charge confirm minor damage",
        "my cousin in {LOC} says everyone is safe",
        "donations for {LOC} are being collected",
        "donations for victims are being collected",
        "{LOC} and {LOC} both reported damage",
        "aftershocks continue across {LOC} since friday",
        "aftershocks continue across the region since friday",
        "reading about the buffalo stampede this week",
        "reading updates about {LOC} this week",
        "enjoying a nice orange juice break",
        "my mobile phone survived the quake",
        "the java update broke my app again",
        "popping a cork to celebrate the rescue",
        "the city will rebuild soon they said",
        "a rock slide blocked the beach road",
        "the island ferry to the port was cancelled",
        "a grand old oak fell on the rapids trail",
        "earthquake drill scheduled for tomorrow",
        "no damage reported after the quake",
        "shaking woke us up twice last night",
    };
}

}  // namespace test_support
