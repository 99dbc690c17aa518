/**
 * Local secret handling. The (value, mask) pair lives in session
 * storage only: it survives a reload during the ceremony and is gone
 * when the tab closes. An explicit export exists for stakeholders who
 * want a longer-lived copy; nothing is persisted silently.
 */

import { fromHex, toHex } from "./bytes.js";

export interface StoredSecret {
  sessionId: string;
  stakeholderId: string;
  value: bigint;
  mask: Uint8Array;
  digestHex: string;
}

interface SecretJson {
  session_id: string;
  stakeholder_id: string;
  value: string;
  mask: string;
  digest: string;
}

function key(sessionId: string, stakeholderId: string): string {
  return `fairdraw:secret:${sessionId}:${stakeholderId}`;
}

export class SecretStore {
  constructor(private readonly storage: Storage) {}

  save(secret: StoredSecret): void {
    const json: SecretJson = {
      session_id: secret.sessionId,
      stakeholder_id: secret.stakeholderId,
      value: secret.value.toString(),
      mask: toHex(secret.mask),
      digest: secret.digestHex,
    };
    this.storage.setItem(key(secret.sessionId, secret.stakeholderId), JSON.stringify(json));
  }

  load(sessionId: string, stakeholderId: string): StoredSecret | null {
    const raw = this.storage.getItem(key(sessionId, stakeholderId));
    if (raw === null) return null;
    try {
      const json = JSON.parse(raw) as SecretJson;
      return {
        sessionId: json.session_id,
        stakeholderId: json.stakeholder_id,
        value: BigInt(json.value),
        mask: fromHex(json.mask),
        digestHex: json.digest,
      };
    } catch {
      return null;
    }
  }

  clear(sessionId: string, stakeholderId: string): void {
    this.storage.removeItem(key(sessionId, stakeholderId));
  }

  /** Portable JSON blob for the export button / file download. */
  export(sessionId: string, stakeholderId: string): string | null {
    return this.storage.getItem(key(sessionId, stakeholderId));
  }

  import(blob: string): StoredSecret {
    const json = JSON.parse(blob) as SecretJson;
    const secret: StoredSecret = {
      sessionId: json.session_id,
      stakeholderId: json.stakeholder_id,
      value: BigInt(json.value),
      mask: fromHex(json.mask),
      digestHex: json.digest,
    };
    this.save(secret);
    return secret;
  }
}
