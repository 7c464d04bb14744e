"""
Literal replay of the textbook BPE learning loop, used as an oracle.

Words are space-separated symbol strings ("l o w </w>"); merges are regex
substitutions. Ties go to the lexicographically smallest pair.
"""

import collections
import re


def get_stats(vocab):
    pairs = collections.defaultdict(int)
    for word, freq in vocab.items():
        symbols = word.split()
        for i in range(len(symbols) - 1):
            pairs[symbols[i], symbols[i + 1]] += freq
    return pairs


def merge_vocab(pair, v_in):
    v_out = {}
    bigram = re.escape(" ".join(pair))
    p = re.compile(r"(?<!\S)" + bigram + r"(?!\S)")
    for word in v_in:
        w_out = p.sub(lambda m: "".join(pair), word)
        v_out[w_out] = v_in[word]
    return v_out


def learn(word_counts, num_merges, min_frequency=2, eow="</w>"):
    vocab = {" ".join(list(word) + [eow]): count for word, count in word_counts.items()}
    merges = []
    for _ in range(num_merges):
        pairs = get_stats(vocab)
        if not pairs:
            break
        top = max(pairs.values())
        if top < min_frequency:
            break
        best = sorted(p for p, c in pairs.items() if c == top)[0]
        vocab = merge_vocab(best, vocab)
        merges.append(best)
    return merges
