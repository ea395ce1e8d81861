#!/usr/bin/env python3
"""Reference TF-IDF tailoring scores for a jobs/letters TSV pair.

Written separately from the C++ scorer (unicodedata classes, Python dicts,
math.fsum) to produce the golden file for the demo corpus:

    python3 tests/oracles/tfidf_oracle.py data/demo/jobs.tsv data/demo/letters.tsv \
        data/stopwords_en_v1.txt > data/demo/expected_scores.csv
"""
import csv
import io
import math
import sys
import unicodedata


def load_stopwords(path):
    words = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return words


def is_word(ch):
    return unicodedata.category(ch)[0] in "LNM"


def tokens(text, stop):
    out, cur = [], []
    for ch in text + " ":
        if is_word(ch):
            cur.append(ch.lower())
        else:
            w = "".join(cur)
            if len(cur) >= 2 and w not in stop:
                out.append(w)
            cur = []
    return out


def read_tsv(path, n_fields):
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        for line in f:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            rows.append(parts[:n_fields] if len(parts) >= n_fields else parts)
    return rows


def counts(toks, vocab):
    c = {}
    for t in toks:
        if t in vocab:
            c[t] = c.get(t, 0) + 1
    return c


def score(job, letter, idf):
    cj, cl = counts(job, idf), counts(letter, idf)
    if cj and sorted(cj) == sorted(cl):
        ratio = {t: cl[t] / cj[t] for t in cj}
        if len(set(ratio.values())) == 1:
            return 1.0
    terms = sorted(set(cj) | set(cl))
    wj = [cj.get(t, 0) * idf[t] for t in terms]
    wl = [cl.get(t, 0) * idf[t] for t in terms]
    nj = math.sqrt(math.fsum(w * w for w in wj))
    nl = math.sqrt(math.fsum(w * w for w in wl))
    if nj == 0 or nl == 0:
        return 0.0
    cos = math.fsum(a * b for a, b in zip(wj, wl)) / (nj * nl)
    return min(1.0, max(0.0, cos))


def main(jobs_path, letters_path, stop_path):
    stop = load_stopwords(stop_path)
    jobs = {r[0]: tokens(r[1], stop) for r in read_tsv(jobs_path, 2)}
    letters = [(r[0], r[1], tokens(r[2], stop)) for r in read_tsv(letters_path, 3)]
    known = [l for l in letters if l[1] in jobs]
    corpus = list(jobs.values()) + [l[2] for l in known]
    n = len(corpus)
    df = {}
    for doc in corpus:
        for t in set(doc):
            df[t] = df.get(t, 0) + 1
    idf = {t: max(0.0, math.log(n / (1 + k))) for t, k in df.items()}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bid_id", "job_id", "tailoring"])
    for bid, job, toks in known:
        w.writerow([bid, job, "%.10g" % score(jobs[job], toks, idf)])
    sys.stdout.write(buf.getvalue())


if __name__ == "__main__":
    if len(sys.argv) != 4:
        sys.exit("usage: tfidf_oracle.py JOBS.tsv LETTERS.tsv STOPWORDS.txt")
    main(*sys.argv[1:])
