def parse_pairs(text):
    pairs = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def count_words(text):
    counts = {}
    for word in text.split():
        counts[word] = counts.get(word, 0) + 1
    return counts


def longest_line(text):
    best = ""
    for line in text.splitlines():
        if len(line) > len(best):
            best = line
    return best


def indent_depth(line):
    depth = 0
    for ch in line:
        if ch == " ":
            depth += 1
        else:
            break
    return depth
