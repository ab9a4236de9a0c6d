#include <algorithm>
#include <array>
#include <cctype>

#include "kgprover/corpus.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

using text::iequals;
using text::istarts_with;

// Templates removed outright: maintenance banners, navigation, citations.
constexpr std::array<std::string_view, 30> kDroppedTemplates = {
    "bookreference", "booklink", "citation", "sourcereview", "sources", "source",
    "proofread", "explain", "improve", "tidy", "refactor", "missinglinks",
    "link", "namedfor", "expand", "stub", "questionable", "delete",
    "merge", "mistake", "mathworld", "wikipedia", "planetmath", "mactutor",
    "navbox", "navigation", "proof wanted", "attribution", "further research", "help",
};

constexpr std::array<std::string_view, 7> kDroppedSections = {
    "sources", "also see", "historical note", "linguistic note",
    "references", "external links", "sources and references",
};

constexpr std::array<std::string_view, 4> kDroppedLinkNamespaces = {
    "category:", "file:", "image:", "media:",
};

constexpr std::array<std::string_view, 4> kMagicWords = {
    "__NOTOC__", "__TOC__", "__NOEDITSECTION__", "__FORCETOC__",
};

// Argument-free templates that stand for ordinary words.
constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kWordTemplates = {{
    {"iff", "if and only if"},
    {"wlog", "without loss of generality"},
    {"ie", "that is"},
    {"eg", "for example"},
    {"st", "such that"},
    {"cf", "compare"},
}};

bool template_dropped(std::string_view name) {
    if (name.empty() || name.front() == ':') return true;  // transclusion
    if (name.ends_with("-stub") || name.starts_with("cite") || name.starts_with("nav"))
        return true;
    return std::find(kDroppedTemplates.begin(), kDroppedTemplates.end(), name) !=
           kDroppedTemplates.end();
}

// Length of a math span starting at s[i] ("$...$", "$$...$$" or
// "<math>...</math>"), or 0 if none opens here or it is unterminated.
std::size_t math_span(std::string_view s, std::size_t i) {
    if (s[i] == '$') {
        std::string_view delim = (i + 1 < s.size() && s[i + 1] == '$') ? "$$" : "$";
        auto close = s.find(delim, i + delim.size());
        if (close == std::string_view::npos) return 0;
        return close + delim.size() - i;
    }
    if (s[i] == '<' && istarts_with(s.substr(i), "<math")) {
        auto open_end = s.find('>', i);
        if (open_end == std::string_view::npos) return 0;
        auto rest = text::to_lower_ascii(s.substr(open_end));
        auto close = rest.find("</math>");
        if (close == std::string::npos) return 0;
        return open_end + close + 7 - i;
    }
    return 0;
}

std::string strip_comments(std::string_view s) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = s.find("<!--", pos);
        if (open == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        out.append(s.substr(pos, open - pos));
        auto close = s.find("-->", open + 4);
        if (close == std::string_view::npos) break;  // unterminated: drop the rest
        pos = close + 3;
    }
    return out;
}

// Removes <tag ...>...</tag> and <tag .../>; when keep_body, only the tags go.
std::string strip_tag(std::string_view s, std::string_view tag, bool keep_body) {
    std::string lower = text::to_lower_ascii(s);
    std::string open_pat = "<" + std::string(tag);
    std::string close_pat = "</" + std::string(tag) + ">";
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = lower.find(open_pat, pos);
        while (open != std::string::npos) {
            char after = open + open_pat.size() < lower.size() ? lower[open + open_pat.size()] : '>';
            if (after == '>' || after == '/' || std::isspace(static_cast<unsigned char>(after))) break;
            open = lower.find(open_pat, open + 1);
        }
        if (open == std::string::npos) {
            out.append(s.substr(pos));
            break;
        }
        out.append(s.substr(pos, open - pos));
        auto gt = lower.find('>', open);
        if (gt == std::string::npos) {
            pos = open + open_pat.size();  // stray "<tag" without '>': drop the marker
            continue;
        }
        if (lower[gt - 1] == '/') {
            pos = gt + 1;
            continue;
        }
        auto close = lower.find(close_pat, gt);
        if (keep_body) {
            pos = gt + 1;
            continue;
        }
        pos = close == std::string::npos ? gt + 1 : close + close_pat.size();
    }
    if (keep_body) {
        // closing tags left over from keep_body mode
        std::string result;
        std::string low = text::to_lower_ascii(out);
        std::size_t p = 0;
        while (true) {
            auto c = low.find(close_pat, p);
            if (c == std::string::npos) {
                result.append(out, p, std::string::npos);
                break;
            }
            result.append(out, p, c - p);
            p = c + close_pat.size();
        }
        return result;
    }
    return out;
}

std::string flatten_template(std::string_view body) {
    // body excludes the outer braces
    std::vector<std::string_view> parts;
    int brace = 0;
    int link = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '{') ++brace;
        else if (c == '}' && brace > 0) --brace;
        else if (c == '[' && i + 1 < body.size() && body[i + 1] == '[') { ++link; ++i; }
        else if (c == ']' && i + 1 < body.size() && body[i + 1] == ']' && link > 0) { --link; ++i; }
        else if (c == '|' && brace == 0 && link == 0) {
            parts.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(body.substr(start));

    auto name = text::to_lower_ascii(text::trim(parts.front()));
    std::replace(name.begin(), name.end(), '_', ' ');
    if (parts.size() == 1) {
        for (const auto& [key, words] : kWordTemplates)
            if (name == key) return std::string(words);
        return {};
    }
    if (template_dropped(name)) return {};

    std::string out;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto arg = parts[i];
        auto eq = arg.find('=');
        if (eq != std::string_view::npos) {
            auto key = text::trim(arg.substr(0, eq));
            bool simple_key = !key.empty() && std::all_of(key.begin(), key.end(), [](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == ' ';
            });
            if (simple_key) arg = arg.substr(eq + 1);
        }
        arg = text::trim(arg);
        if (arg.empty()) continue;
        if (!out.empty()) out += ' ';
        out.append(arg);
    }
    return out;
}

std::string normalize_target(std::string_view target) {
    auto t = text::trim(target);
    while (!t.empty() && t.front() == ':') t.remove_prefix(1);
    std::string out;
    bool space = false;
    for (char c : text::trim(t)) {
        if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

std::string render_link(std::string_view inner) {
    auto bar = inner.find('|');
    std::string target = normalize_target(inner.substr(0, bar));
    for (auto ns : kDroppedLinkNamespaces)
        if (istarts_with(target, ns)) return {};
    if (bar == std::string_view::npos) return target.empty() ? std::string{} : "[[" + target + "]]";
    auto label = std::string(text::trim(inner.substr(bar + 1)));
    if (target.empty()) return label;
    if (label.empty() || label == target) return "[[" + target + "]]";
    return "[[" + target + "|" + label + "]]";
}

// Templates and links, leaving math spans untouched.
std::string rewrite_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (auto m = math_span(s, i)) {
            out.append(s.substr(i, m));
            i += m;
            continue;
        }
        if (s.compare(i, 2, "{{") == 0) {
            int depth = 0;
            int brace = 0;
            std::size_t j = i;
            std::size_t close = std::string_view::npos;
            while (j < s.size()) {
                if (s.compare(j, 2, "{{") == 0) {
                    depth++;
                    j += 2;
                } else if (s[j] == '{') {
                    ++brace;
                    ++j;
                } else if (s[j] == '}' && brace > 0) {
                    --brace;
                    ++j;
                } else if (s.compare(j, 2, "}}") == 0) {
                    j += 2;
                    if (--depth == 0) {
                        close = j;
                        break;
                    }
                } else {
                    ++j;
                }
            }
            if (close == std::string_view::npos) {
                i += 2;  // unbalanced opener: drop the marker only
                continue;
            }
            out += flatten_template(s.substr(i + 2, close - i - 4));
            i = close;
            continue;
        }
        if (s.compare(i, 2, "}}") == 0) {
            i += 2;
            continue;
        }
        if (s.compare(i, 2, "[[") == 0) {
            auto close = s.find("]]", i + 2);
            auto nested = s.find("[[", i + 2);
            if (close != std::string_view::npos && (nested == std::string_view::npos || nested > close)) {
                out += render_link(s.substr(i + 2, close - i - 2));
                i = close + 2;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

bool heading(std::string_view line, int* level, std::string_view* title) {
    auto t = text::trim(line);
    int lead = 0;
    while (lead < static_cast<int>(t.size()) && t[lead] == '=') ++lead;
    int tail = 0;
    while (tail < static_cast<int>(t.size()) && t[t.size() - 1 - tail] == '=') ++tail;
    if (lead < 2 || tail < 2 || lead + tail >= static_cast<int>(t.size())) return false;
    *level = std::min(lead, tail);
    *title = text::trim(t.substr(lead, t.size() - lead - tail));
    return !title->empty();
}

// Removes headings whose section has no body before the next heading of the
// same or a higher level.
std::string drop_empty_sections(std::string_view s) {
    auto lines = text::split_lines(s);
    std::vector<bool> keep(lines.size(), true);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        int level = 0;
        std::string_view title;
        if (!heading(lines[i], &level, &title)) continue;
        bool has_body = false;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            int next_level = 0;
            std::string_view next_title;
            if (heading(lines[j], &next_level, &next_title)) {
                if (next_level <= level) break;
                has_body = true;  // emptied subsections are caught by the next pass
                break;
            }
            if (!text::trim(lines[j]).empty()) {
                has_body = true;
                break;
            }
        }
        keep[i] = has_body;
    }
    std::string out;
    bool blank_pending = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!keep[i]) continue;
        if (text::trim(lines[i]).empty()) {
            blank_pending = !out.empty();
            continue;
        }
        if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
        blank_pending = false;
        out.append(lines[i]);
    }
    return out;
}

std::string drop_sections_and_tidy(std::string_view s) {
    std::string out;
    int skip_level = 0;  // 0: not skipping
    bool blank_pending = false;
    for (auto raw : text::split_lines(s)) {
        auto line = text::trim_right(raw);
        int level = 0;
        std::string_view title;
        if (heading(line, &level, &title)) {
            if (skip_level && level <= skip_level) skip_level = 0;
            if (!skip_level) {
                for (auto name : kDroppedSections)
                    if (iequals(title, name)) skip_level = level;
            }
        }
        if (skip_level) continue;
        std::string cleaned(line);
        for (auto word : kMagicWords) {
            for (auto p = cleaned.find(word); p != std::string::npos; p = cleaned.find(word))
                cleaned.erase(p, word.size());
        }
        cleaned = std::string(text::trim_right(cleaned));
        if (cleaned.empty()) {
            blank_pending = !out.empty();
            continue;
        }
        if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
        blank_pending = false;
        out += cleaned;
    }
    return drop_empty_sections(text::trim(out));
}

std::string clean_pass(std::string_view raw) {
    std::string s = text::normalize_newlines(raw);
    s = strip_comments(s);
    s = strip_tag(s, "ref", false);
    s = strip_tag(s, "noinclude", false);
    s = strip_tag(s, "includeonly", true);
    s = strip_tag(s, "onlyinclude", true);
    s = strip_tag(s, "section", false);
    s = rewrite_markup(s);
    return drop_sections_and_tidy(s);
}

bool is_method_title(std::string_view title) {
    auto colon = title.find(':');
    auto name = text::to_lower_ascii(text::trim(colon == std::string_view::npos ? title : title.substr(colon + 1)));
    return name.starts_with("proof by ") || name.starts_with("method of ") ||
           name.ends_with("technique") || name.find("proof technique") != std::string::npos;
}

bool has_similarity_cue(std::string_view context) {
    static constexpr std::array<std::string_view, 5> cues = {
        "similarly", "analogous", "mutatis mutandis", "same argument", "likewise",
    };
    auto lower = text::to_lower_ascii(context);
    return std::any_of(cues.begin(), cues.end(),
                       [&](std::string_view cue) { return lower.find(cue) != std::string::npos; });
}

}  // namespace

std::string clean_wikitext(std::string_view raw) {
    std::string current = clean_pass(raw);
    // Each pass can expose markup hidden by the previous one (a comment
    // splitting "{{"); iterate to the fixpoint so cleaning is idempotent.
    for (int i = 0; i < 32; ++i) {
        std::string next = clean_pass(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

std::string extract_name(std::string_view title, std::string_view ns) {
    if (!ns.empty() && title.size() > ns.size() && title[ns.size()] == ':' &&
        istarts_with(title, ns))
        return std::string(text::trim(title.substr(ns.size() + 1)));
    return std::string(text::trim(title));
}

std::vector<LinkRef> extract_links(std::string_view content) {
    std::vector<LinkRef> links;
    auto is_boundary = [](char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; };
    std::size_t i = 0;
    while (i < content.size()) {
        if (auto m = math_span(content, i)) {
            i += m;
            continue;
        }
        if (content.compare(i, 2, "[[") != 0) {
            ++i;
            continue;
        }
        auto close = content.find("]]", i + 2);
        if (close == std::string_view::npos) break;
        auto inner = content.substr(i + 2, close - i - 2);
        auto target = inner.substr(0, inner.find('|'));
        target = target.substr(0, target.find('#'));
        std::string normalized = normalize_target(target);
        if (!normalized.empty()) {
            // sentence around the link, ignoring terminators inside other links
            std::size_t begin = i;
            while (begin > 0 && !is_boundary(content[begin - 1])) --begin;
            std::size_t end = close + 2;
            while (end < content.size() && !is_boundary(content[end])) {
                if (content.compare(end, 2, "[[") == 0) {
                    auto c = content.find("]]", end + 2);
                    if (c == std::string_view::npos) break;
                    end = c + 2;
                    continue;
                }
                ++end;
            }
            links.push_back({std::move(normalized), std::string(text::trim(content.substr(begin, end - begin)))});
        }
        i = close + 2;
    }
    return links;
}

std::optional<NodeType> page_node_type(const RawPage& page) {
    if (iequals(page.ns, "Definition")) return NodeType::definition;
    if (iequals(page.ns, "Axiom")) return NodeType::axiom;
    if (iequals(page.ns, "Proof")) return NodeType::proof;
    if (page.ns.empty()) {
        return page.title.find("/Proof") != std::string::npos ? NodeType::proof : NodeType::theorem;
    }
    return std::nullopt;
}

NodeType title_node_type(std::string_view title) {
    auto t = text::trim(title);
    if (istarts_with(t, "Definition:")) return NodeType::definition;
    if (istarts_with(t, "Axiom:")) return NodeType::axiom;
    if (istarts_with(t, "Proof:") || t.find("/Proof") != std::string_view::npos) return NodeType::proof;
    return NodeType::theorem;
}

std::vector<RawPage> filter_namespaces(std::vector<RawPage> pages, FilterCounts* counts) {
    std::vector<RawPage> kept;
    FilterCounts local;
    for (auto& page : pages) {
        if (page_node_type(page)) {
            kept.push_back(std::move(page));
            ++local.kept;
        } else {
            ++local.dropped_by_namespace[page.ns];
        }
    }
    if (counts) *counts = std::move(local);
    return kept;
}

RelType classify_relationship(const Node& source, std::string_view target_title,
                              std::string_view context_window) {
    const NodeType target = title_node_type(target_title);
    const NodeType from = source.type;
    if (target == NodeType::axiom) return RelType::USES_AXIOM;
    if (target == NodeType::definition) {
        if (from == NodeType::definition) return RelType::RELATED_DEFINITION;
        if (from == NodeType::proof || from == NodeType::theorem) return RelType::USES_DEFINITION;
        return RelType::LINK;
    }
    if (from != NodeType::proof) return RelType::LINK;
    if (is_method_title(target_title)) return RelType::PROOF_TECHNIQUE;
    if (target == NodeType::proof) {
        return has_similarity_cue(context_window) ? RelType::SIMILAR_PROOF : RelType::LINK;
    }
    return RelType::PROOF_DEPENDENCY;
}

}  // namespace kgp
