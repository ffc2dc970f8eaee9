#include "afrisynth/languages.hpp"

#include "afrisynth/util.hpp"

namespace afrisynth {

const std::vector<std::string>& default_target_languages() {
    static const std::vector<std::string> codes{"yor", "ibo", "hau", "swa", "zul", "pcm", "som", "afr", "ara"};
    return codes;
}

const std::vector<Language>& known_languages() {
    static const std::vector<Language> langs{
        {"yor", "Yoruba", {"yo", "yorùbá"}},
        {"ibo", "Igbo", {"ig"}},
        {"hau", "Hausa", {"ha"}},
        {"swa", "Swahili", {"sw", "kiswahili", "swh"}},
        {"zul", "isiZulu", {"zu", "zulu"}},
        {"pcm", "Nigerian Pidgin", {"pidgin", "naija"}},
        {"som", "Somali", {"so"}},
        {"afr", "Afrikaans", {"af"}},
        {"ara", "Arabic", {"ar", "arb"}},
        {"eng", "English", {"en"}},
        {"fra", "French", {"fr", "fre"}},
        {"amh", "Amharic", {"am"}},
        {"ewe", "Ewe", {"ee"}},
        {"kin", "Kinyarwanda", {"rw"}},
        {"lin", "Lingala", {"ln"}},
        {"lug", "Luganda", {"lg"}},
        {"orm", "Oromo", {"om"}},
        {"sna", "Shona", {"sn"}},
        {"sot", "Sesotho", {"st"}},
        {"twi", "Twi", {"tw"}},
        {"wol", "Wolof", {"wo"}},
        {"xho", "isiXhosa", {"xh", "xhosa"}},
    };
    return langs;
}

std::optional<std::string> resolve_language(std::string_view tag) {
    const std::string needle = ascii_lower(trim(tag));
    if (needle.empty()) return std::nullopt;
    for (const auto& lang : known_languages()) {
        if (needle == lang.code || needle == ascii_lower(lang.name)) return lang.code;
        for (const auto& alias : lang.aliases) {
            if (needle == alias) return lang.code;
        }
    }
    return std::nullopt;
}

std::string language_name(std::string_view code) {
    for (const auto& lang : known_languages()) {
        if (lang.code == code) return lang.name;
    }
    return std::string(code);
}

}  // namespace afrisynth
