import { Match } from './types';
import { UiState } from './state';

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/**
 * Ranked match cards, strictly in the order the API returned them.
 * Each card carries data-subject so a click can promote it to the new query.
 */
export function renderCards(matches: Match[], stale: boolean): string {
  const cls = stale ? 'cards stale' : 'cards';
  const cards = matches
    .map(
      (m, i) => `
  <div class="card" data-subject="${escapeHtml(m.subject_id)}">
   <canvas class="thumb" width="96" height="96" data-subject="${escapeHtml(m.subject_id)}"></canvas>
   <div class="rank">#${i + 1}</div>
   <div class="sid">${escapeHtml(m.subject_id)}</div>
   <div class="dist">${m.distance.toFixed(2)}</div>
  </div>`,
    )
    .join('');
  return `<div class="${cls}">${cards}</div>`;
}

export function renderBanner(error: string | null): string {
  if (!error) return '';
  return `<div class="banner" role="alert">${escapeHtml(error)}<button class="dismiss">x</button></div>`;
}

export function renderClusterPanel(state: UiState, members: string[], n: number): string {
  const items = members
    .map((sid) => `<li${sid === state.subject ? ' class="current"' : ''}>${escapeHtml(sid)}</li>`)
    .join('');
  return `
  <label>clusters k
   <input type="range" id="cut-k" min="1" max="${n}" value="${state.cutK}">
   <span id="cut-k-value">${state.cutK}</span>
  </label>
  <p>cluster containing <b>${escapeHtml(state.subject)}</b> (${members.length} subjects)</p>
  <ul class="members">${items}</ul>`;
}

export function renderControls(
  state: UiState,
  datasets: string[],
  subjects: string[],
  types: string[],
): string {
  const opts = (values: string[], current: string) =>
    values
      .map(
        (v) =>
          `<option value="${escapeHtml(v)}"${v === current ? ' selected' : ''}>${escapeHtml(v)}</option>`,
      )
      .join('');
  return `
  <label>dataset <select id="sel-dataset">${opts(datasets, state.dataset)}</select></label>
  <label>subject <select id="sel-subject">${opts(subjects, state.subject)}</select></label>
  <label>pose <select id="sel-pose">${opts(['standing', 'sitting'], state.pose)}</select></label>
  <label>descriptor <select id="sel-type">${opts(types, state.type)}</select></label>
  <label>metric <select id="sel-metric">${opts(['l1', 'l2', 'mahalanobis'], state.metric)}</select></label>
  <label>k <input type="number" id="inp-k" min="1" value="${state.k}"></label>
  <button id="btn-query">query</button>`;
}
