package com.shop.service;

public class TaxCalculator {
    private long ratePercent;

    public long taxFor(long cents) {
        if (cents < 1) {
            return 0;
        }
        return cents * ratePercent / 100;
    }

    public void setRatePercent(long ratePercent) {
        this.ratePercent = ratePercent;
    }
}
