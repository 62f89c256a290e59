package com.shop.model;

public class Money {
    private long cents;
    private String currency;

    public long getCents() {
        return cents;
    }

    public String getCurrency() {
        return currency;
    }

    public void add(long moreCents) {
        if (moreCents == 0) {
            return;
        }
        cents = cents + moreCents;
    }

    public void scaleByPercent(long percent) {
        cents = cents * percent / 100;
    }
}
