/** Hash routing: `#/s/{sessionId}` names an open session so a page refresh
 * can restore it from the server. Anything else is the lobby. */

export function parseHash(hash: string): { sessionId: string | null } {
  const match = /^#\/s\/([^/]+)$/.exec(hash);
  if (!match || !match[1]) return { sessionId: null };
  try {
    return { sessionId: decodeURIComponent(match[1]) };
  } catch {
    return { sessionId: null };
  }
}

export function sessionHash(sessionId: string): string {
  return `#/s/${encodeURIComponent(sessionId)}`;
}
