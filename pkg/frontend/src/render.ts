// DOM rendering. Every element shown to the learner is built from the
// service payload verbatim; no client-side analysis happens here.

import type { AttemptRecord, FeedbackCard, Sentence, StatsPayload, WordReport } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSentenceList(
  sentences: Sentence[],
  onSelect: (sentence: Sentence) => void,
): HTMLElement {
  const list = el("div", "sentence-list");
  for (const sentence of sentences) {
    const row = el("button", `sentence difficulty-${sentence.difficulty}`);
    row.dataset.sentenceId = sentence.sentence_id;
    row.append(
      el("span", "sentence-text", sentence.text),
      el("span", "sentence-difficulty", sentence.difficulty),
    );
    row.addEventListener("click", () => onSelect(sentence));
    list.append(row);
  }
  return list;
}

// Word chips reflect the service's per-word flags and severity bins; the
// class name carries the severity so tests can read flags straight off the DOM.
export function renderWordRow(
  sentence: Sentence,
  words: WordReport[],
  onWordTap: (report: WordReport) => void,
): HTMLElement {
  const row = el("div", "word-row");
  words.forEach((report) => {
    const chip = el(
      "button",
      `word ${report.mispronounced ? "flagged" : "ok"} severity-${report.severity_bin}`,
    );
    chip.dataset.wordIndex = String(report.word_index);
    chip.dataset.mispronounced = String(report.mispronounced);
    chip.append(
      el("span", "word-phonemes", report.expected_phonemes.join(" ")),
      el("span", "word-severity", report.mispronounced ? report.severity_bin : ""),
    );
    chip.addEventListener("click", () => onWordTap(report));
    row.append(chip);
  });
  return row;
}

export function renderFeedbackCard(card: FeedbackCard, diagramSvg: string | null): HTMLElement {
  const box = el("section", "feedback-card");
  box.dataset.expected = card.expected;
  box.append(el("h3", "feedback-headline", card.headline));

  if (card.contrast_points.length > 0) {
    const list = el("ul", "contrast-points");
    for (const point of card.contrast_points) {
      const item = el("li", `contrast contrast-${point.feature}`);
      item.append(
        el("strong", "contrast-feature", point.feature),
        el(
          "span",
          "contrast-values",
          ` ${point.expected_value} (you made: ${point.produced_value}) — `,
        ),
        el("span", "contrast-instruction", point.instruction),
      );
      list.append(item);
    }
    box.append(list);
  }

  if (card.guidance.length > 0) {
    const steps = el("ol", "guidance");
    for (const step of card.guidance) steps.append(el("li", "guidance-step", step));
    box.append(steps);
  }

  if (diagramSvg) {
    const figure = el("figure", "diagram");
    figure.innerHTML = diagramSvg; // SVG embedded untransformed
    box.append(figure);
  }
  return box;
}

export function renderAttemptSummary(record: AttemptRecord): HTMLElement {
  const summary = el("p", "attempt-summary");
  const { n_words, n_flagged } = record.summary;
  summary.textContent =
    n_flagged === 0
      ? `All ${n_words} words pronounced correctly.`
      : `${n_flagged} of ${n_words} words need work.`;
  return summary;
}

export function renderStats(stats: StatsPayload): HTMLElement {
  const box = el("section", "stats");
  if (!stats.wilcoxon || !stats.likert) {
    box.append(el("p", "stats-empty", "No ratings yet."));
    return box;
  }
  const wilcoxon = stats.wilcoxon;
  const p = el("p", "stats-wilcoxon");
  p.dataset.pValue = String(wilcoxon.p_value);
  p.textContent =
    `Improvement significance: p = ${wilcoxon.p_value} ` +
    `(${wilcoxon.method}, W = ${wilcoxon.w_statistic}, n = ${stats.n_ratings})`;
  box.append(p);

  const table = el("table", "stats-phonemes");
  const head = el("tr");
  for (const label of ["phoneme", "before", "after", "change"]) {
    head.append(el("th", undefined, label));
  }
  table.append(head);
  for (const [phoneme, row] of Object.entries(stats.likert.per_phoneme)) {
    const tr = el("tr", "stats-row");
    tr.dataset.phoneme = phoneme;
    tr.append(
      el("td", "stats-phoneme", `/${phoneme}/`),
      el("td", "stats-pre", row.pre.formatted),
      el("td", "stats-post", row.post.formatted),
      el("td", "stats-delta", row.delta_mean.toFixed(2)),
    );
    table.append(tr);
  }
  box.append(table);
  return box;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.append(el("span", "error-text", message));
  const retry = el("button", "retry", "Retry");
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  return banner;
}

// Discrete 1-5 picker; out-of-range values are impossible by construction.
export function renderScorePicker(name: string, onChange: (value: number) => void): HTMLElement {
  const group = el("div", `score-picker score-${name}`);
  for (let value = 1; value <= 5; value++) {
    const btn = el("button", "score", String(value));
    btn.dataset.value = String(value);
    btn.addEventListener("click", () => {
      group.querySelectorAll(".score.selected").forEach((b) => b.classList.remove("selected"));
      btn.classList.add("selected");
      onChange(value);
    });
    group.append(btn);
  }
  return group;
}
