#!/usr/bin/env node
// Usage: validate.js FILE.glb...  Prints one summary line per file and
// exits 1 when any file has validation errors.
const fs = require('fs');
const path = require('path');
const validator = require('gltf-validator');

async function main(files) {
  if (files.length === 0) {
    console.error('usage: validate.js FILE.glb...');
    return 2;
  }
  let failed = false;
  for (const file of files) {
    const bytes = new Uint8Array(fs.readFileSync(file));
    const report = await validator.validateBytes(bytes, {
      uri: path.basename(file),
      maxIssues: 100,
    });
    const { numErrors, numWarnings } = report.issues;
    console.log(`${file}: errors=${numErrors} warnings=${numWarnings}`);
    for (const m of report.issues.messages) {
      if (m.severity === 0) console.log(`  ${m.code} ${m.pointer || ''} ${m.message}`);
    }
    if (numErrors > 0) failed = true;
  }
  return failed ? 1 : 0;
}

main(process.argv.slice(2)).then(
  (code) => process.exit(code),
  (err) => {
    console.error(String(err));
    process.exit(2);
  },
);
